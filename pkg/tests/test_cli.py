import json

import pytest

from dtsched.cli import main
from dtsched.fixtures import case_machine, case_order, flat_tariff, two_tier_tariff
from dtsched.planning import Disturbance
from dtsched.pta import OrderSpec
from dtsched.records import RunLog
from dtsched.store import RunStore
from dtsched.tariff import PriceSchedule


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(obj if isinstance(obj, dict) else obj.to_dict()))
        return str(path)

    return {
        "machine": write("machine", case_machine()),
        "order": write("order", case_order()),
        "flat": write("flat", flat_tariff(50.0)),
        "two_tier": write("two_tier", two_tier_tariff()),
        "write": write,
    }


def _args(files, tmp_path, command, prices="two_tier", *extra):
    return [command, "--machine", files["machine"], "--order", files["order"],
            "--prices", files[prices], "--data-dir", str(tmp_path / "data"), *extra]


class TestPlan:
    def test_flat(self, files, tmp_path, capsys):
        assert main(_args(files, tmp_path, "plan", "flat")) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["schedule"] == [2, 2, 2, 1]
        assert out["cost"] == pytest.approx(190 / 7, abs=1e-12)

    def test_infeasible(self, files, tmp_path):
        files["order"] = files["write"]("bad_order", OrderSpec(8.0, ((7, 2.0),)))
        assert main(_args(files, tmp_path, "plan")) == 2

    def test_bad_json(self, files, tmp_path, capsys):
        (tmp_path / "broken.json").write_text("{not json")
        files["broken"] = str(tmp_path / "broken.json")
        assert main(_args(files, tmp_path, "plan", "broken")) == 1
        assert "--prices" in capsys.readouterr().err

    def test_invalid_machine_names_field(self, files, tmp_path, capsys):
        bad = case_machine().to_dict()
        bad["allocated_inventory"] = 9
        files["machine"] = files["write"]("bad_machine", bad)
        assert main(_args(files, tmp_path, "plan")) == 1
        assert "allocated_inventory" in capsys.readouterr().err

    def test_missing_file(self, files, tmp_path):
        files["machine"] = str(tmp_path / "nope.json")
        assert main(_args(files, tmp_path, "plan")) == 1


class TestRun:
    def test_persists(self, files, tmp_path):
        out = tmp_path / "run.json"
        assert main(_args(files, tmp_path, "run", "two_tier", "--out", str(out))) == 0
        log = RunLog.from_json(out.read_text())
        store = RunStore(tmp_path / "data")
        assert store.list("tariff") == [1]
        assert store.list("run") == [2]
        assert store.load_run(2) == log

    def test_disturbance_file_changes_decisions(self, files, tmp_path):
        # a price spike right after the 9:00 idle, cheap power afterwards
        spike = PriceSchedule(((9.2, 10.2, 300.0), (10.2, 24.0, 5.0)))
        upd = {"disturbances": [Disturbance.tariff(9.2, spike).to_dict()]}
        dist = files["write"]("dist", upd)
        plain, hit = tmp_path / "a.json", tmp_path / "b.json"
        assert main(_args(files, tmp_path, "run", "two_tier", "--out", str(plain))) == 0
        assert main(_args(files, tmp_path, "run", "two_tier", "--out", str(hit),
                          "--disturbances", dist)) == 0
        a, b = RunLog.from_json(plain.read_text()), RunLog.from_json(hit.read_text())
        assert a.schedule == (2, 0, 2, 2, 1)
        assert b.schedule == (2, 0, 1, 2, 2)
        assert b.steps[:2] == a.steps[:2]
        assert b.meta["disturbances"]

    def test_short_tariff(self, files, tmp_path):
        files["short"] = files["write"]("short", flat_tariff(50.0, 8.0, 10.0))
        assert main(_args(files, tmp_path, "run", "short")) == 1

    def test_rescheduling_failure(self, files, tmp_path, capsys):
        files["order"] = files["write"]("bad_order", OrderSpec(8.0, ((7, 2.0),)))
        assert main(_args(files, tmp_path, "run")) == 3
        log = RunLog.from_json(capsys.readouterr().out)
        assert log.outcome == "rescheduling_failure"
        assert "failed_decision" in log.extra

    def test_csv(self, files, tmp_path):
        out = tmp_path / "run.csv"
        assert main(_args(files, tmp_path, "run", "two_tier", "--format", "csv", "--out", str(out))) == 0
        assert out.read_text().splitlines()[0] == "hour,power_mw,price_per_mwh,cumulative_cost"

    def test_bad_window(self, files, tmp_path):
        assert main(_args(files, tmp_path, "run", "two_tier", "--window", "0")) == 1


class TestCompare:
    def _run(self, files, tmp_path, prices="two_tier"):
        main(_args(files, tmp_path, "run", prices, "--out", str(tmp_path / "x.json")))
        return str(RunStore(tmp_path / "data").list("run")[-1])

    def test_self(self, files, tmp_path, capsys):
        rid = self._run(files, tmp_path)
        capsys.readouterr()
        assert main(["compare", rid, rid, "--data-dir", str(tmp_path / "data")]) == 0
        assert json.loads(capsys.readouterr().out)["savings_percent"] == 0.0

    def test_mismatched(self, files, tmp_path):
        a = self._run(files, tmp_path, "two_tier")
        b = self._run(files, tmp_path, "flat")
        assert main(["compare", a, b, "--data-dir", str(tmp_path / "data")]) == 1

    def test_against_benchmark(self, files, tmp_path, capsys):
        assert main(_args(files, tmp_path, "compare", "two_tier", "--against", "benchmark")) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["savings_percent"] > 0

    def test_from_files_and_csv(self, files, tmp_path):
        self._run(files, tmp_path)
        run = str(tmp_path / "x.json")
        out = tmp_path / "cmp.json"
        assert main(["compare", run, run, "--format", "csv", "--out", str(out),
                     "--data-dir", str(tmp_path / "data")]) == 0
        assert (tmp_path / "cmp_a.csv").exists() and (tmp_path / "cmp_b.csv").exists()

    def test_unknown_run(self, tmp_path):
        assert main(["compare", "41", "42", "--data-dir", str(tmp_path / "data")]) == 1

    def test_needs_two_runs(self, tmp_path):
        assert main(["compare", "--data-dir", str(tmp_path / "data")]) == 1


def test_benchmark_command(files, tmp_path, capsys):
    assert main(_args(files, tmp_path, "benchmark")) == 0
    log = RunLog.from_json(capsys.readouterr().out)
    assert log.schedule == (2, 2, 2, 1)


def test_outputs_byte_identical(files, tmp_path):
    outs = []
    for name in ("p1", "p2"):
        out = tmp_path / f"{name}.json"
        main(_args(files, tmp_path, "plan", "two_tier", "--out", str(out)))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
