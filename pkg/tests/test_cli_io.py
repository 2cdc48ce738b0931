import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radialmass import cli, csvio, presets
from radialmass.core import Grid, MassProfile, ModelParams, build_grid, sample_initial_mass
from radialmass.explicit import VortexParams, vortex_mass

P2 = ModelParams(2.0)

VORTEX = """\
[run]
alpha = 2
h_rho = 0.01
t_final = 1
output_dir = {out}
[datum]
preset = vortex
[outputs]
outputs = snapshots, shock-path, level-sets, waiting-time
snapshot_times = 0, 0.5, 1
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text.format(out=str(tmp_path / "out")), encoding="utf-8")
    return str(path)


def err_line(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    return lines[0]


class TestSnapshotFormat:
    def grid(self):
        return Grid(0.25, 0.01, 4, 3, 1.0, 1.0, 2.0)

    def test_zero_profile(self, tmp_path):
        path = str(tmp_path / "z.csv")
        csvio.write_snapshot(path, MassProfile(np.zeros(5), 2), self.grid(), P2)
        meta, rho, m, u = csvio.read_snapshot(path)
        assert rho.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert np.all(m == 0) and np.all(u == 0)
        assert meta["alpha"] == "2" and meta["t"] == "0.02"

    def test_layout(self, tmp_path):
        path = str(tmp_path / "a.csv")
        csvio.write_snapshot(path, MassProfile([0, 0.1, 0.3, 0.3, 0.3]), self.grid(), P2)
        raw = open(path, "rb").read()
        assert b"\r" not in raw
        lines = raw.decode("utf-8").split("\n")
        assert lines[:4] == ["# alpha=2", "# h_rho=0.25", "# h_t=0.01", "# t=0"]
        assert lines[4] == "rho,m,u"
        assert lines[-1] == ""

    @given(st.lists(st.floats(0.0, 1e6, allow_subnormal=True), min_size=4, max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_bitwise(self, inc):
        # write to a unique file each example; tmp_path is not reset between examples
        import tempfile
        m = np.concatenate(([0.0], np.cumsum(inc)))
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "r.csv")
            csvio.write_snapshot(path, MassProfile(m), self.grid(), P2)
            _, _, back, _ = csvio.read_snapshot(path)
        assert back.tobytes() == m.tobytes()

    def test_vortex_initial_density(self, tmp_path):
        d = presets.vortex()
        g = build_grid(d, P2, 0.1, 0.1, 3.0)
        path = str(tmp_path / "v.csv")
        csvio.write_snapshot(path, sample_initial_mass(d, g), g, P2)
        _, rho, _, u = csvio.read_snapshot(path)
        assert np.allclose(u[(rho > 0) & (rho <= 1 + 1e-9)], 1.0, atol=1e-14)
        assert np.all(u[rho > 1 + 1e-9] == 0.0)

    def test_not_a_snapshot(self, tmp_path):
        path = str(tmp_path / "t.csv")
        csvio.write_table(path, ["t", "S"], [[0.0], [1.0]])
        with pytest.raises(ValueError):
            csvio.read_snapshot(path)


class TestRun:
    def test_vortex_snapshots_match_oracle(self, tmp_path):
        cfg = write_config(tmp_path, VORTEX)
        assert cli.main(["run", cfg]) == 0
        out = tmp_path / "out"
        names = sorted(os.listdir(out))
        assert names == ["level_sets.csv", "shock_path.csv", "snapshot_t0.5.csv",
                         "snapshot_t0.csv", "snapshot_t1.csv", "waiting_time.csv"]
        meta, rho, m, _ = csvio.read_snapshot(str(out / "snapshot_t1.csv"))
        t = float(meta["t"])
        err = np.max(np.abs(m - vortex_mass(t, rho, VortexParams(1.0, 1.0), P2)))
        assert err <= 0.01 ** (1 / 3)

    def test_deterministic(self, tmp_path):
        cfg = write_config(tmp_path, VORTEX)
        out = tmp_path / "out"
        cli.main(["run", cfg])
        first = {n: (out / n).read_bytes() for n in os.listdir(out)}
        cli.main(["run", cfg])
        assert first == {n: (out / n).read_bytes() for n in os.listdir(out)}

    def test_empty_outputs(self, tmp_path):
        cfg = write_config(tmp_path, VORTEX.replace(
            "outputs = snapshots, shock-path, level-sets, waiting-time", "outputs ="))
        assert cli.main(["run", cfg]) == 0
        assert not (tmp_path / "out").exists()

    def test_waiting_time_report_ordered(self, tmp_path):
        rows = []
        for beta in (1, 2):
            text = (f"alpha = 2\nh_rho = 4e-3\nt_final = 0.7\npreset = power-beta\nbeta = {beta}\n"
                    f"output_dir = {{out}}/b{beta}\n")
            cfg = write_config(tmp_path, text, f"b{beta}.cfg")
            assert cli.main(["waiting-time", cfg]) == 0
            lines = (tmp_path / "out" / f"b{beta}" / "waiting_time.csv").read_text().splitlines()
            assert lines[0] == "datum,classification,C,T_lower,onset,T_upper"
            rows.append(lines[1].split(","))
        assert [r[1] for r in rows] == ["finite", "finite"]
        assert float(rows[0][4]) < float(rows[1][4])
        for r in rows:
            assert float(r[3]) <= float(r[4]) <= float(r[5])

    def test_exact_and_converge(self, tmp_path):
        text = VORTEX.replace("h_rho = 0.01", "h_rho = 0.02") + "convergence_grids = 0.08,0.04,0.02\n"
        cfg = write_config(tmp_path, text)
        assert cli.main(["exact", cfg]) == 0
        _, rho, m, _ = csvio.read_snapshot(str(tmp_path / "out" / "exact_t0.5.csv"))
        assert m[-1] == 1.0
        assert cli.main(["converge", cfg]) == 0
        meta, header, data = csvio.read_table(str(tmp_path / "out" / "convergence.csv"))
        assert header == ["h_rho", "h_t", "error"]
        assert data.shape == (3, 3) and np.all(np.diff(data[:, 2]) < 0)
        assert meta["oracle"] == "exact"

    def test_levelsets(self, tmp_path):
        cfg = write_config(tmp_path, VORTEX)
        assert cli.main(["levelsets", cfg, "--levels=0.5,1"]) == 0
        _, header, data = csvio.read_table(str(tmp_path / "out" / "level_sets.csv"))
        assert header == ["t", "level_0.5", "level_1"]
        assert np.all(np.diff(data[:, 2]) >= 0)


class TestModuleEntry:
    def test_python_m(self, tmp_path):
        import subprocess
        import sys
        cfg = write_config(tmp_path, VORTEX)
        res = subprocess.run([sys.executable, "-m", "radialmass", "run", cfg, "--t_final=0.1",
                              "--snapshot_times=0.1", "--outputs=snapshots"],
                             capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        assert res.stdout.strip().endswith("snapshot_t0.1.csv")


class TestExitCodes:
    def test_config_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, VORTEX.replace("alpha = 2\n", "alpha = 2\nalpha = 3\n"))
        assert cli.main(["run", cfg]) == 2
        line = err_line(capsys)
        assert line.startswith("radialmass: error code=2 kind=config message=line 3: duplicate")

    def test_misplaced_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, VORTEX + "alpha = 3\n")
        assert cli.main(["run", cfg]) == 2
        assert "belongs in [run]" in err_line(capsys)

    def test_scope_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, VORTEX)
        assert cli.main(["run", cfg, "--alpha=0.5"]) == 2
        assert "alpha >= 1" in err_line(capsys)

    def test_missing_file(self, tmp_path, capsys):
        assert cli.main(["run", str(tmp_path / "nope.cfg")]) == 4
        assert "kind=io" in err_line(capsys)

    def test_unwritable_output(self, tmp_path, capsys):
        (tmp_path / "blocker").write_text("")
        cfg = write_config(tmp_path, VORTEX.replace("{out}", "{out}/../blocker/sub"))
        assert cli.main(["run", cfg]) == 4
        err_line(capsys)

    def test_numeric_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, VORTEX)
        assert cli.main(["levelsets", cfg, "--levels=5"]) == 3
        assert "kind=numeric" in err_line(capsys)

    def test_bad_override(self, tmp_path, capsys):
        cfg = write_config(tmp_path, VORTEX)
        assert cli.main(["run", cfg, "alpha=3"]) == 2
        err_line(capsys)

    def test_no_closed_form(self, tmp_path, capsys):
        text = "alpha = 2\nh_rho = 0.01\nt_final = 0.1\npreset = power-beta\nbeta = 1\n" \
               "output_dir = {out}\n"
        assert cli.main(["exact", write_config(tmp_path, text)]) == 2
        assert "no closed-form" in err_line(capsys)


class TestShippedConfigs:
    @pytest.mark.parametrize("name", ["vortex.cfg", "waiting_time.cfg", "two_bumps.cfg"])
    def test_parses(self, name):
        from radialmass.config import parse_config
        path = os.path.join(os.path.dirname(__file__), os.pardir, "configs", name)
        cfg = parse_config(open(path, encoding="utf-8").read(),
                           base_dir=os.path.dirname(os.path.abspath(path)))
        assert cfg.alpha == 2.0 and cfg.h_rho == 1e-3
