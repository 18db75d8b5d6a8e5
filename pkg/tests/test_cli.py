import json
import math

import numpy as np
import pytest

from fracbd.cli import main
from fracbd.estimation import EULER_GAMMA, EstimateReport


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestMlEval:
    def test_exponential(self, capsys):
        code, out, _ = run(capsys, "ml-eval", "1", "1", "1")
        assert code == 0
        assert out.strip() == "2.718281828459045"

    def test_negative_argument(self, capsys):
        code, out, _ = run(capsys, "ml-eval", "0.5", "1", "-1")
        assert code == 0
        assert abs(float(out) - 0.4275835761550807) < 1e-9

    def test_domain_error_exit_code(self, capsys):
        code, _, err = run(capsys, "ml-eval", "0", "1", "1")
        assert code == 2
        assert "error" in err

    def test_overflow_exit_code(self, capsys):
        code, _, err = run(capsys, "ml-eval", "0.05", "1", "5")
        assert code == 1
        assert "failure" in err


class TestSimulate:
    def test_yule_deterministic_files(self, capsys, tmp_path):
        out = tmp_path / "a"
        args = ("simulate", "--process", "yule", "--nu", "1", "--rate", "1",
                "--n", "5", "--seed", "42", "--out", str(out))
        assert run(capsys, *args)[0] == 0
        first = (tmp_path / "a_intertimes.csv").read_text()
        steps = (tmp_path / "a_steps.csv").read_text()
        assert run(capsys, *args)[0] == 0
        assert (tmp_path / "a_intertimes.csv").read_text() == first
        assert (tmp_path / "a_steps.csv").read_text() == steps
        assert first.splitlines()[0] == "index,inter_time,event_time"
        assert len(first.splitlines()) == 6
        # rows are plain full-precision floats that round-trip
        inter_vals = [float(l.split(",")[1]) for l in first.splitlines()[1:]]
        event_vals = [float(l.split(",")[2]) for l in first.splitlines()[1:]]
        assert all(v > 0 for v in inter_vals)
        assert event_vals == pytest.approx(np.cumsum(inter_vals), rel=1e-15)
        assert steps.splitlines()[0] == "event_time,population"
        assert steps.splitlines()[1] == "0.0,1"

    def test_linear_death_path_shape(self, capsys, tmp_path):
        out = tmp_path / "d"
        code, _, _ = run(capsys, "simulate", "--process", "linear-death", "--nu", "0.75",
                         "--rate", "1", "--n0", "40", "--seed", "7", "--out", str(out))
        assert code == 0
        lines = (tmp_path / "d_steps.csv").read_text().strip().splitlines()
        pops = [int(l.split(",")[1]) for l in lines[1:]]
        assert pops == list(range(40, -1, -1))

    def test_invalid_nu_exit_code(self, capsys, tmp_path):
        code, _, err = run(capsys, "simulate", "--nu", "1.5", "--rate", "1",
                           "--n", "5", "--out", str(tmp_path / "x"))
        assert code == 2

    def test_missing_n_exit_code(self, capsys, tmp_path):
        code, _, err = run(capsys, "simulate", "--nu", "0.5", "--rate", "1",
                           "--out", str(tmp_path / "x"))
        assert code == 2
        assert "--n" in err

    def test_stream_changes_draws(self, capsys, tmp_path):
        a = tmp_path / "s0"
        b = tmp_path / "s1"
        run(capsys, "simulate", "--nu", "0.5", "--rate", "1", "--n", "4",
            "--seed", "1", "--stream", "0", "--out", str(a))
        run(capsys, "simulate", "--nu", "0.5", "--rate", "1", "--n", "4",
            "--seed", "1", "--stream", "1", "--out", str(b))
        assert (tmp_path / "s0_intertimes.csv").read_text() != (tmp_path / "s1_intertimes.csv").read_text()


class TestEstimate:
    def make_exact_line_file(self, tmp_path, n=3):
        # log-times on the exact line -gamma - 2 ln(i): zero residuals
        times = np.exp(-EULER_GAMMA - 2.0 * np.log(np.arange(1, n + 1)))
        f = tmp_path / "times.txt"
        f.write_text("\n".join(repr(float(t)) for t in times) + "\n")
        return f

    def test_exact_line_report(self, capsys, tmp_path):
        f = self.make_exact_line_file(tmp_path)
        out = tmp_path / "est"
        code, text, _ = run(capsys, "estimate", "--input", str(f), "--seed", "3",
                            "--out", str(out))
        assert code == 0
        assert "nu_ls" in text and "0.5" in text
        report = EstimateReport.from_dict(
            {k: v for k, v in json.loads((tmp_path / "est.json").read_text()).items()
             if k != "input"}
        )
        assert report.nu_ls == pytest.approx(0.5, rel=1e-10)
        assert report.nu_res == pytest.approx(math.sqrt(2.0), rel=1e-10)
        resid = (tmp_path / "est_residuals.csv").read_text().strip().splitlines()
        assert resid[0] == "index,x,y,fitted,residual,leverage"
        assert len(resid) == 4

    def test_report_json_round_trip(self, capsys, tmp_path):
        rng_file = tmp_path / "data.txt"
        gen = np.random.default_rng(5)
        rng_file.write_text("\n".join(repr(float(v)) for v in gen.uniform(0.1, 3.0, 40)) + "\n")
        out = tmp_path / "r"
        code, _, _ = run(capsys, "estimate", "--input", str(rng_file), "--seed", "11",
                         "--out", str(out))
        assert code == 0
        obj = json.loads((tmp_path / "r.json").read_text())
        report = EstimateReport.from_dict({k: v for k, v in obj.items() if k != "input"})
        assert json.loads(json.dumps(report.to_dict())) == {
            k: v for k, v in obj.items() if k != "input"
        }

    def test_summary_stats_in_output(self, capsys, tmp_path):
        f = tmp_path / "v.txt"
        f.write_text("\n".join(["1.0", "2.0", "3.0", "4.0", "5.0"]))
        out = tmp_path / "s"
        code, text, _ = run(capsys, "estimate", "--input", str(f), "--seed", "0",
                            "--out", str(out))
        assert code == 0
        obj = json.loads((tmp_path / "s.json").read_text())
        raw = obj["input"]["raw_summary"]
        assert raw["mean"] == 3.0 and raw["median"] == 3.0 and raw["n"] == 5
        assert raw["sd"] == pytest.approx(math.sqrt(2.5))

    def test_branching_interpretation(self, capsys, tmp_path):
        f = tmp_path / "b.txt"
        f.write_text("\n".join(["10.0", "6.0", "1.0"]))
        out = tmp_path / "b"
        code, _, _ = run(capsys, "estimate", "--input", str(f),
                         "--interpretation", "branching-times", "--seed", "0",
                         "--out", str(out))
        assert code == 0
        obj = json.loads((tmp_path / "b.json").read_text())
        assert obj["input"]["inter_event_summary"]["max"] == 5.0  # waits 4, 5, 1

    def test_clip_at_zero_is_presentation_only(self, capsys, tmp_path):
        # heavy-noise sample whose residual-route rate interval dips below zero
        gen = np.random.default_rng(3)
        f = tmp_path / "noisy.txt"
        f.write_text("\n".join(repr(float(v)) for v in gen.lognormal(0, 4.0, 20)) + "\n")
        out = tmp_path / "clip"
        code, text, _ = run(capsys, "estimate", "--input", str(f), "--seed", "1",
                            "--out", str(out), "--clip-at-zero")
        assert code == 0
        obj = json.loads((tmp_path / "clip.json").read_text())
        assert obj["intervals"]["rate_res"][0] < 0.0  # JSON keeps the raw bound
        rate_res_line = next(l for l in text.splitlines() if l.startswith("rate_res"))
        assert "(0," in rate_res_line.replace(" ", "")
        assert any("negative lower bound" in w for w in obj["warnings"])

    def test_estimate_rerun_is_byte_identical(self, capsys, tmp_path):
        f = tmp_path / "d.txt"
        gen = np.random.default_rng(8)
        f.write_text("\n".join(repr(float(v)) for v in gen.uniform(0.2, 4.0, 30)) + "\n")
        args = ("estimate", "--input", str(f), "--seed", "21", "--out")
        run(capsys, *args, str(tmp_path / "e1"))
        run(capsys, *args, str(tmp_path / "e2"))
        assert (tmp_path / "e1.json").read_bytes() == (tmp_path / "e2.json").read_bytes()
        assert (tmp_path / "e1_residuals.csv").read_bytes() == (
            tmp_path / "e2_residuals.csv"
        ).read_bytes()

    def test_too_few_values_exit_code(self, capsys, tmp_path):
        f = tmp_path / "few.txt"
        f.write_text("1.0\n2.0\n")
        code, _, err = run(capsys, "estimate", "--input", str(f), "--out",
                           str(tmp_path / "x"))
        assert code == 2

    def test_nonpositive_value_exit_code(self, capsys, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("1.0\n0.0\n2.0\n")
        code, _, err = run(capsys, "estimate", "--input", str(f), "--out",
                           str(tmp_path / "x"))
        assert code == 2


class TestMc:
    def test_point_study_csv(self, capsys, tmp_path):
        out = tmp_path / "mc"
        code, _, _ = run(capsys, "mc", "point", "--nu", "0.5", "--rate", "0.5",
                         "--n", "40,80", "--reps", "8", "--seed", "2",
                         "--out", str(out))
        assert code == 0
        lines = (tmp_path / "mc.csv").read_text().strip().splitlines()
        assert lines[0] == "process,true_nu,true_rate,n,estimator,metric,value,reps,failures"
        assert len(lines) == 1 + 2 * 4 * 3

    def test_rerun_byte_identical(self, capsys, tmp_path):
        out = tmp_path / "mc2"
        args = ("mc", "interval", "--nu", "0.5", "--rate", "0.5", "--n", "30",
                "--reps", "5", "--bootstrap-b", "120", "--seed", "9", "--out", str(out))
        run(capsys, *args)
        first = (tmp_path / "mc2.csv").read_bytes()
        run(capsys, *args)
        assert (tmp_path / "mc2.csv").read_bytes() == first

    def test_jobs_invariance(self, capsys, tmp_path):
        base = ("mc", "point", "--nu", "0.6", "--rate", "1.0", "--n", "30",
                "--reps", "6", "--seed", "4")
        run(capsys, *base, "--jobs", "1", "--out", str(tmp_path / "j1"))
        run(capsys, *base, "--jobs", "2", "--out", str(tmp_path / "j2"))
        assert (tmp_path / "j1.csv").read_bytes() == (tmp_path / "j2.csv").read_bytes()

    def test_json_format(self, capsys, tmp_path):
        out = tmp_path / "mj"
        code, _, _ = run(capsys, "mc", "point", "--nu", "0.5", "--rate", "0.5",
                         "--n", "30", "--reps", "4", "--seed", "2",
                         "--format", "json", "--out", str(out))
        assert code == 0
        obj = json.loads((tmp_path / "mj.json").read_text())
        assert obj["study"] == "point"
        assert obj["config"]["seed"] == 2

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "study.cfg"
        cfg.write_text("nu = 0.5\nrate = 0.5\nn = 30\nreps = 4\n# comment\n")
        out = tmp_path / "mcf"
        code, _, _ = run(capsys, "mc", "point", "--config", str(cfg), "--seed", "3",
                         "--out", str(out))
        assert code == 0
        assert (tmp_path / "mcf.csv").exists()

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nu=0.5\nrate=0.5\nn=30\nwhat=1\n")
        code, _, err = run(capsys, "mc", "point", "--config", str(cfg),
                           "--out", str(tmp_path / "x"))
        assert code == 2
        assert "what" in err

    def test_missing_parameters(self, capsys, tmp_path):
        code, _, err = run(capsys, "mc", "point", "--out", str(tmp_path / "x"))
        assert code == 2

    def test_reps_one_smoke(self, capsys, tmp_path):
        out = tmp_path / "one"
        code, _, _ = run(capsys, "mc", "interval", "--nu", "0.5", "--rate", "0.5",
                         "--n", "20", "--reps", "1", "--bootstrap-b", "100",
                         "--seed", "5", "--out", str(out))
        assert code == 0
        text = (tmp_path / "one.csv").read_text()
        for line in text.strip().splitlines()[1:]:
            cols = line.split(",")
            if cols[5] == "coverage" and cols[6]:
                assert float(cols[6]) in (0.0, 1.0)


class TestSeedFallback:
    def test_env_seed_equals_flag_seed(self, capsys, tmp_path, monkeypatch):
        a = tmp_path / "flag"
        run(capsys, "simulate", "--nu", "0.5", "--rate", "1", "--n", "4",
            "--seed", "99", "--out", str(a))
        monkeypatch.setenv("FRACBD_SEED", "99")
        b = tmp_path / "env"
        run(capsys, "simulate", "--nu", "0.5", "--rate", "1", "--n", "4",
            "--out", str(b))
        assert (tmp_path / "flag_intertimes.csv").read_text() == (
            tmp_path / "env_intertimes.csv"
        ).read_text()

    def test_bad_env_seed(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("FRACBD_SEED", "abc")
        code, _, err = run(capsys, "simulate", "--nu", "0.5", "--rate", "1",
                           "--n", "4", "--out", str(tmp_path / "x"))
        assert code == 2


def test_usage_error_exit_code(capsys):
    assert main(["bogus-command"]) == 2
    capsys.readouterr()
