import dataclasses

import numpy as np
import pytest

from onebitcs.bench.cli import main
from onebitcs.bench.config import ConfigError, parse_config, parse_props_config
from onebitcs.bench.runner import (
    HEADER,
    PROPS_HEADER,
    CSVFormatError,
    TrialRecord,
    build_dictionary,
    emit_plotdata,
    read_records,
    records_to_csv,
    run_experiment,
    run_props,
    run_trial,
    summarize,
    summarize_records,
    trial_seed,
    write_records,
)

SMALL = """
dictionary.construction = random
dictionary.n = 8
dictionary.N = 12
dictionary.seed = 1
signal.s = 2
measure.m = 40, 80
algorithms = lp_direction, ht_direction
trials = 3
seed = 5
output.timing = false
"""

SMALL_FULL = """
dictionary.n = 6
dictionary.N = 9
signal.s = 2
measure.m = 60
measure.sigma = 1.0
measure.dithered = true
algorithms = lp_full, socp_full, ht_full
trials = 2
seed = 3
output.timing = false
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# ---------------------------------------------------------------- config

@pytest.mark.parametrize(
    "text,match",
    [
        ("algorithms = lp_direction\n", "measure.m"),
        ("measure.m = 10\n", "algorithms"),
        ("measure.m = 10\nalgorithms = lp_direction\nfoo = 1\n", "unknown keys"),
        ("measure.m = 10\nmeasure.m = 20\nalgorithms = lp_direction\n", "duplicate"),
        ("measure.m = ten\nalgorithms = lp_direction\n", "bad value"),
        ("measure.m = 10\nalgorithms = magic\n", "unknown algorithms"),
        ("measure.m = 10\nalgorithms = lp_full\n", "dithered"),
        ("measure.m = 10\nalgorithms = lp_full\nmeasure.dithered = true\n", "sigma"),
        ("measure.m = 10\nalgorithms = lp_direction, lp_full\nmeasure.dithered = true\nmeasure.sigma = 1\n", "undithered"),
        ("measure.m = 10\nalgorithms = lp_direction\ntrials = 0\n", "trials"),
        ("measure.m = 10\nalgorithms = lp_direction\ndictionary.construction = identity\n", "n == N"),
        ("measure.m = 10\nalgorithms = lp_direction\ndictionary.construction = haar\n", "construction"),
        ("measure.m = 10\nalgorithms = lp_direction\nnonsense line\n", "line 3"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_config_parses_lists_and_comments():
    cfg = parse_config("# comment\nmeasure.m = 1, 2 ,3  # trailing\nalgorithms = ht_direction\nrecover.t = 7\n")
    assert cfg.m_grid == [1, 2, 3] and cfg.algorithms == ["ht_direction"] and cfg.t == 7


def test_props_config_errors():
    with pytest.raises(ConfigError):
        parse_props_config("props.property = curvature\n")
    with pytest.raises(ConfigError):
        parse_props_config("props.property = tes\nprops.sphere = torus\n")


# ---------------------------------------------------------------- runs

def test_one_record_per_algorithm():
    cfg = parse_config(SMALL.replace("measure.m = 40, 80", "measure.m = 40").replace("trials = 3", "trials = 1"))
    recs = run_experiment(cfg)
    assert [r.algorithm for r in recs] == ["lp_direction", "ht_direction"]
    for r in recs:
        assert 0 <= r.direction_error <= 2 and r.full_error is None


def test_full_records_have_both_errors():
    recs = run_experiment(parse_config(SMALL_FULL))
    assert len(recs) == 6
    for r in recs:
        assert r.full_error is not None and r.full_error >= 0
        assert 0 <= r.direction_error <= 2


def test_rerun_is_byte_identical():
    cfg = parse_config(SMALL)
    assert records_to_csv(run_experiment(cfg)) == records_to_csv(run_experiment(cfg))


def test_parallel_equals_serial():
    cfg = parse_config(SMALL)
    serial = run_experiment(cfg, threads=1)
    parallel = run_experiment(cfg, threads=2)
    assert set(r.to_row().__repr__() for r in serial) == set(r.to_row().__repr__() for r in parallel)


def test_single_trial_replays_in_isolation():
    cfg = parse_config(SMALL)
    recs = run_experiment(cfg)
    D = build_dictionary(cfg.dictionary)
    replay = run_trial(cfg, D, 1, 2)
    assert replay == [r for r in recs if r.cell_id == 1 and r.trial == 2]


def test_trial_seed_stable_and_distinct():
    a = trial_seed(5, (40, 8, 12), 0)
    assert a == trial_seed(5, (40, 8, 12), 0)
    assert len({a, trial_seed(5, (40, 8, 12), 1), trial_seed(6, (40, 8, 12), 0), trial_seed(5, (41, 8, 12), 0)}) == 4
    assert 0 <= a < 2**64


def test_zero_signal_records_flagged():
    cfg = parse_config(SMALL_FULL + "signal.class = zero\n")
    recs = run_experiment(cfg)
    assert recs and all(r.degenerate for r in recs)


def test_ht_direction_median_decreases_over_grid():
    cfg = parse_config(
        "dictionary.n = 32\ndictionary.N = 48\ndictionary.seed = 7\nsignal.s = 2\n"
        "measure.m = 250, 500, 1000, 2000, 4000\nalgorithms = ht_direction\ntrials = 50\nseed = 2024\n"
    )
    rows = summarize_records(run_experiment(cfg))
    med = [row["median_direction_error"] for row in rows]
    print("ht_direction medians over m grid:", [round(v, 4) for v in med])
    assert all(b < a for a, b in zip(med, med[1:]))


# ---------------------------------------------------------------- CSV and summaries

def record(**kw):
    base = dict(cell_id=0, m=10, n=2, N=3, s=1, sigma=0.0, r=1.0, algorithm="lp_direction", trial=0,
                direction_error=0.1, full_error=None, status="optimal", degenerate=False, wall_ms=0.0)
    base.update(kw)
    return TrialRecord(**base)


def test_header_and_roundtrip(tmp_path):
    recs = run_experiment(parse_config(SMALL))
    p = tmp_path / "t.csv"
    write_records(p, recs)
    assert p.read_text().splitlines()[0] == HEADER
    assert read_records(p) == recs


def test_hand_median_of_five_rows(tmp_path):
    errs = [0.5, 0.1, 0.3, 0.9, 0.2]
    recs = [record(trial=i, direction_error=e) for i, e in enumerate(errs)]
    recs.append(record(trial=5, direction_error=None, status="degenerate", degenerate=True))
    p = tmp_path / "t.csv"
    write_records(p, recs)
    (row,) = summarize(p)
    assert row["median_direction_error"] == pytest.approx(0.3)
    # sorted 0.1 0.2 0.3 0.5 0.9; 90th percentile at position 3.6 -> 0.5 + 0.6 * 0.4
    assert row["p90_direction_error"] == pytest.approx(0.74)
    assert row["trials"] == 6 and row["degenerate"] == 1


def test_empty_and_single_row(tmp_path):
    p = write(tmp_path, "empty.csv", "")
    assert summarize(p) == []
    p = write(tmp_path, "header.csv", HEADER + "\n")
    assert summarize(p) == []
    p = tmp_path / "one.csv"
    write_records(p, [record(direction_error=0.42)])
    (row,) = summarize(p)
    assert row["median_direction_error"] == 0.42 and row["p90_direction_error"] == 0.42


def test_malformed_rows_report_line_numbers(tmp_path):
    good = records_to_csv([record()]).splitlines()
    text = "\n".join([good[0], good[1], "0,10,2,3", good[1].replace(",0.1,", ",-3,"), good[1]]) + "\n"
    p = write(tmp_path, "bad.csv", text)
    with pytest.raises(CSVFormatError) as exc:
        read_records(p)
    assert [msg.split(":")[0] for msg in exc.value.problems] == ["line 3", "line 4"]


def test_bad_header_reported(tmp_path):
    p = write(tmp_path, "bad.csv", "a,b,c\n")
    with pytest.raises(CSVFormatError, match="line 1"):
        read_records(p)


def test_plotdata(tmp_path):
    recs = [record(m=m, trial=k, direction_error=e) for m, e in [(10, 0.4), (20, 0.2)] for k in range(3)]
    recs = [dataclasses.replace(r, cell_id=0 if r.m == 10 else 1) for r in recs]
    recs += [record(algorithm="lp_full", m=10, direction_error=0.3, full_error=0.6)]
    p = tmp_path / "t.csv"
    write_records(p, recs)
    series = emit_plotdata(p, tmp_path / "plots")
    assert series["lp_direction"] == [(10, 0.4), (20, 0.2)]
    assert (tmp_path / "plots" / "lp_direction.csv").read_text() == "m,median_error\n10,0.4\n20,0.2\n"
    assert (tmp_path / "plots" / "lp_full.csv").read_text() == "m,median_error\n10,0.6\n"


def test_props_rows():
    cfg = parse_props_config("dictionary.n = 8\ndictionary.N = 12\nprops.property = rip1\nprops.samples = 20\nmeasure.m = 50, 100\nseed = 1\n")
    est = run_props(cfg)
    assert [e.params["m"] for e in est] == [50, 100]
    assert run_props(cfg)[0].statistics == est[0].statistics


# ---------------------------------------------------------------- CLI

def test_cli_run_summarize_plotdata(tmp_path, capsys):
    cfg = write(tmp_path, "c.cfg", SMALL)
    out = tmp_path / "t.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--no-timing"]) == 0
    first = out.read_text()
    assert main(["run", "--config", str(cfg), "--out", str(out), "--no-timing", "--threads", "2"]) == 0
    assert out.read_text() == first
    capsys.readouterr()
    assert main(["summarize", "--in", str(out)]) == 0
    assert capsys.readouterr().out.startswith("cell_id,m,algorithm")
    assert main(["plotdata", "--in", str(out), "--out", str(tmp_path / "p")]) == 0
    assert (tmp_path / "p" / "ht_direction.csv").exists()


def test_cli_props(tmp_path, capsys):
    cfg = write(tmp_path, "p.cfg", "dictionary.n = 8\ndictionary.N = 12\nprops.property = spep\nprops.samples = 10\nmeasure.m = 30\n")
    assert main(["props", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == PROPS_HEADER and lines[1].startswith("SPEP,30,8,12,2,10,")


def test_cli_exit_codes(tmp_path):
    bad = write(tmp_path, "bad.cfg", "measure.m = 10\n")
    assert main(["run", "--config", str(bad)]) == 2
    good = write(tmp_path, "good.cfg", SMALL)
    assert main(["run", "--config", str(good), "--threads", "0"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 3
    assert main(["summarize", "--in", str(tmp_path / "missing.csv")]) == 3
    malformed = write(tmp_path, "m.csv", HEADER + "\n1,2,3\n")
    assert main(["summarize", "--in", str(malformed)]) == 3
    assert main(["run", "--config", str(good), "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == 3
