import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primo.errors import ParseError
from primo.runlog import RunLog, Trial, best_value_trace, check_accounting, hv_trace

REF = [3.0, 3.0]


def _trials(points, fidelities=None, z_max=27):
    fidelities = fidelities or [z_max] * len(points)
    out, total = [], 0.0
    for i, (y, z) in enumerate(zip(points, fidelities)):
        delta = z / z_max
        total += delta
        out.append(Trial(i, {"x": i}, z, False, list(y) if y is not None else None, None, delta, total,
                         status="ok" if y is not None else "failed"))
    return out


def test_blackbox_trace_moves_every_step():
    trace = hv_trace(_trials([(2, 2), (1, 2.5), (2.5, 1)]), REF, z_max=27)
    assert [k for k, _ in trace] == [1, 2, 3]
    hv = [h for _, h in trace]
    assert hv == pytest.approx([1.0, 1.5, 2.0])


def test_dominated_trial_leaves_trace_flat():
    trace = hv_trace(_trials([(1, 1), (2, 2)]), REF, z_max=27)
    assert trace[0][1] == trace[1][1] == pytest.approx(4.0)


def test_low_fidelity_trials_do_not_count():
    trials = _trials([(1, 1), (0.5, 0.5), (2, 2)], fidelities=[9, 9, 27])
    # 1/3 + 1/3 + 1: the z_max point lands at cumulative 5/3, i.e. step 2
    trace = hv_trace(trials, REF, z_max=27)
    assert [h for _, h in trace] == [0.0]
    assert hv_trace(trials, REF, z_max=27, budget=2)[1][1] == pytest.approx(1.0)


def test_failed_trials_are_skipped():
    trace = hv_trace(_trials([None, (1, 1)]), REF, z_max=27)
    assert [h for _, h in trace] == [0.0, pytest.approx(4.0)]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 3), st.floats(0, 3), st.sampled_from([1, 3, 9, 27])), min_size=1, max_size=30))
def test_trace_non_decreasing(rows):
    trials = _trials([r[:2] for r in rows], [r[2] for r in rows])
    hv = [h for _, h in hv_trace(trials, REF, z_max=27)]
    assert all(b >= a for a, b in zip(hv, hv[1:]))
    assert check_accounting(trials) == []


def test_accounting_problems_reported():
    good = _trials([(1, 1), (2, 2)])
    assert check_accounting(good) == []
    bad = [good[0], Trial(1, {}, 27, False, [1, 1], None, 1.5, 2.5)]
    problems = check_accounting(bad)
    assert any("delta" in p for p in problems)
    drift = [good[0], Trial(1, {}, 27, False, [1, 1], None, 1.0, 3.0)]
    assert any("cumulative" in p for p in check_accounting(drift))


def test_best_value_trace():
    trials = _trials([(3.0,), (1.0,), (2.0,)])
    assert best_value_trace(trials, 27) == [(1, 3.0), (2, 1.0), (3, 1.0)]


def test_round_trip_is_byte_stable(tmp_path):
    log = RunLog({"optimizer": "rs", "seed": 0, "reference_point": np.array(REF), "z_max": 27})
    for t in _trials([(1, np.float64(2)), None]):
        log.append(t)
    log.close()
    path = tmp_path / "a" / "seed_0.log"
    log.write(path)
    back = RunLog.load(path)
    assert back.complete and back.trials == log.trials
    assert back.dumps() == path.read_text()
    assert hv_trace(back, back.reference_point) == hv_trace(log, log.reference_point)


def test_closed_log_rejects_trials():
    log = RunLog({})
    log.close()
    with pytest.raises(ParseError):
        log.append(_trials([(1, 1)])[0])


def test_incomplete_log_has_no_footer():
    log = RunLog({"optimizer": "rs"})
    log.append(_trials([(1, 1)])[0])
    assert not RunLog.loads(log.dumps()).complete


@pytest.mark.parametrize(
    "text, needle",
    [
        ("", "empty"),
        ('{"type": "trial"}\n', "line 1"),
        ('{"type": "header", "format": "runlog/1"}\n{oops\n', "line 2"),
        ('{"type": "header", "format": "runlog/1"}\n{"type": "mystery"}\n', "line 2"),
        ('{"type": "header", "format": "runlog/1"}\n{"type": "footer", "n_trials": 3}\n', "count"),
        ('{"type": "header", "format": "runlog/1"}\n{"type": "trial", "index": 0}\n', "line 2"),
    ],
)
def test_malformed_logs(text, needle):
    with pytest.raises(ParseError, match=needle):
        RunLog.loads(text)
