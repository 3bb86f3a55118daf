"""Configuration parsing, serialization formats, artifact round trips."""

import numpy as np
import pytest

from heterosim.config import RunConfig, parse_config, serialize_config
from heterosim.errors import ConfigError
from heterosim.outputs import (
    colormap_blue_white_red,
    read_field_csv,
    read_spacetime_binary,
    render_heatmap,
    write_field_csv,
    write_spacetime_binary,
)


class TestParseConfig:
    def test_empty_model_only_gets_defaults(self):
        config = parse_config("[run]\nmodel = GrassForest\n")
        assert config.x_max == 1.0
        assert config.step == 0.05
        assert config.sigma_w == 0.01
        assert config.n_nodes == 400
        assert config.mu == 0.1
        assert config.nu == 0.05

    def test_areal_defaults(self):
        config = parse_config("[run]\nmodel = Areal\n")
        assert config.x_max == 40.0
        assert config.step == 0.1
        assert config.k1 == 2.0
        assert config.chi1 == 1.5
        assert config.d_e == 0.2
        assert config.saturation == 1.2

    def test_negative_mortality_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[run]\nmodel = SL4\n[vegetation]\nmu = -1\n")
        assert "mu" in str(err.value)

    def test_unknown_key_names_line(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[run]\nmodel = SL4\n\n[grid]\nnn = 100\n")
        assert err.value.line == 5
        assert err.value.key == "nn"

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[nosuch]\nx = 1\n")

    def test_malformed_value_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[grid]\nn = many\n")
        assert err.value.key == "n"

    def test_key_outside_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("model = SL4\n")

    def test_comments_and_blanks_ignored(self):
        config = parse_config(
            "# a comment\n[run]\nmodel = SL4  ; trailing\n\n[grid]\nn = 128\n")
        assert config.model == "SL4"
        assert config.n_nodes == 128

    def test_round_trip_identity(self):
        text = ("[run]\nmodel = SL4\nseed = 7\n[gradient]\nalpha_intercept = 0.8\n"
                "alpha_slope = 0.5\nbeta_intercept = 0.15\nbeta_slope = 0.1\n"
                "[kernels]\nsigma = 0.025\n[time]\nt_end = 123.5\n")
        config = parse_config(text)
        assert parse_config(serialize_config(config)) == config

    def test_round_trip_with_slope_profile(self):
        config = RunConfig(model="SL4", slope_parameter=3.42)
        assert parse_config(serialize_config(config)) == config

    def test_step_cap_is_model_aware(self):
        with pytest.raises(ConfigError):
            parse_config("[run]\nmodel = SL4\n[time]\nstep = 0.15\n")
        areal = parse_config("[run]\nmodel = Areal\n[time]\nstep = 0.15\n")
        assert areal.step == 0.15


class TestFieldCsv:
    def test_round_trip_exact(self, tmp_path):
        xs = np.linspace(0.0, 1.0, 7)
        times = np.array([0.0, 0.1, 0.2])
        rng = np.random.Generator(np.random.Philox(0))
        values = rng.uniform(-1, 1, (3, 7))
        path = write_field_csv(tmp_path / "f.csv", xs, times, values)
        xs2, times2, values2 = read_field_csv(path)
        assert np.array_equal(xs, xs2)
        assert np.array_equal(times, times2)
        assert np.array_equal(values, values2)

    def test_header_row_shape(self, tmp_path):
        xs = np.array([0.0, 0.5, 1.0])
        path = write_field_csv(tmp_path / "f.csv", xs, [0.0], np.zeros((1, 3)))
        first = path.read_text().splitlines()[0].split(",")
        assert first[0] == "x"
        assert len(first) == 4

    def test_shape_mismatch_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_field_csv(tmp_path / "f.csv", np.zeros(3), [0.0], np.zeros((1, 4)))


class TestSpacetimeBinary:
    def test_payload_size_exact(self, tmp_path):
        path = write_spacetime_binary(tmp_path / "b.bin", np.zeros((2, 3)))
        assert path.stat().st_size == 48
        assert (tmp_path / "b.bin.meta").exists()

    def test_round_trip(self, tmp_path):
        rng = np.random.Generator(np.random.Philox(1))
        block = rng.normal(0, 1, (11, 13))
        path = write_spacetime_binary(tmp_path / "b.bin", block)
        assert np.array_equal(read_spacetime_binary(path), block)

    def test_little_endian_layout(self, tmp_path):
        block = np.array([[1.0, 2.0], [3.0, 4.0]])
        path = write_spacetime_binary(tmp_path / "b.bin", block)
        raw = np.frombuffer(path.read_bytes(), dtype="<f8")
        assert list(raw) == [1.0, 2.0, 3.0, 4.0]  # row-major


class TestRenderHeatmap:
    def test_p6_header(self, tmp_path):
        path = render_heatmap(tmp_path / "im.ppm", np.zeros((500, 400)))
        with path.open("rb") as fh:
            assert fh.read(15) == b"P6\n400 500\n255\n"
        assert path.stat().st_size == 15 + 400 * 500 * 3

    def test_colormap_endpoints(self):
        rgb = colormap_blue_white_red(np.array([0.0, 0.5, 1.0]))
        assert list(rgb[0]) == [0, 0, 255]      # blue at the minimum
        assert list(rgb[1]) == [255, 255, 255]  # white mid-scale
        assert list(rgb[2]) == [255, 0, 0]      # red at the maximum

    def test_nan_cells_marked_distinctly(self):
        rgb = colormap_blue_white_red(np.array([np.nan]))
        assert list(rgb[0]) == [0, 0, 0]

    def test_constant_array_renders_white(self, tmp_path):
        path = render_heatmap(tmp_path / "c.ppm", np.full((2, 2), 3.0))
        body = path.read_bytes()[11:]
        assert body == b"\xff" * 12

    def test_deterministic_bytes(self, tmp_path):
        rng = np.random.Generator(np.random.Philox(2))
        block = rng.normal(0, 1, (20, 30))
        a = render_heatmap(tmp_path / "a.ppm", block).read_bytes()
        b = render_heatmap(tmp_path / "b.ppm", block).read_bytes()
        assert a == b
