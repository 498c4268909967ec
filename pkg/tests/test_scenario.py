from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from cfdr.payloads import PayloadKind, Role, Violation
from cfdr.scenario import (
    DanglingReference,
    SchemaError,
    ScenarioScript,
    fault_matrix,
    generate_script,
    parse_scenario,
    run,
)

from scenario_helpers import ORACLE, PARTIES, script, step

K = PayloadKind


def kinds_per_step(trace):
    lookup = {tx.tx_id: tx.kind for _, tx in trace.ledger.sealed()}
    return [[lookup[t] for t in rec.tx_ids] for rec in trace.steps]


def test_minimal_script_parses():
    s = parse_scenario(script(step("upload", user="alice", file_id="F", size=16)))
    assert s.seed == 7 and len(s.steps) == 1 and s.architecture == "smart_contract"


def test_dangling_file_reference():
    with pytest.raises(DanglingReference, match=r"steps\[0\]\.file_id"):
        parse_scenario(script(step("read", user="alice", file_id="nope")))


def test_declared_file_needs_no_upload():
    s = parse_scenario(script(step("read", user="alice", file_id="G"), header='files = ["G"]'))
    assert s.files == ("G",)


def test_dangling_user_and_ref_step():
    with pytest.raises(DanglingReference):
        parse_scenario(script(step("upload", user="mallory", file_id="F", size=1)))
    with pytest.raises(DanglingReference):
        parse_scenario(script(step("upload", user="alice", file_id="F", size=1),
                              step("measure", metric="rt", value="0.5", ref_step=3),
                              parties=PARTIES + ORACLE))


def test_duplicate_labels_rejected():
    dup = PARTIES + '\n[[parties]]\nrole = "User"\nlabel = "alice"\n'
    with pytest.raises(SchemaError, match="duplicate"):
        parse_scenario(script(step("upload", user="alice", file_id="F", size=1), parties=dup))


@pytest.mark.parametrize("text, match", [
    (script(step("upload", user="alice", file_id="F", size=1), header="colour = 3"), "unknown key"),
    (script(step("upload", user="alice", file_id="F", size=1, extra=2)), "unknown key"),
    (script(step("upload", user="alice", file_id="F")), "exactly one of size or data"),
    (script(step("fly", user="alice")), "unknown op"),
    (script(step("upload", user="alice", file_id="F", size=1), header='architecture = "p2p"'), "architecture"),
    (script(step("evaluate_sla", window_start=0)), r"\[sla\]"),
    ("seed = 1\nparties = [\n= 3\n", "line 3"),
])
def test_schema_errors(text, match):
    with pytest.raises(SchemaError, match=match):
        parse_scenario(text)


def test_missing_cloud_rejected():
    parties = '[[parties]]\nrole = "User"\nlabel = "u"\n[[parties]]\nrole = "Contract"\nlabel = "k"\n'
    with pytest.raises(SchemaError, match="Cloud"):
        parse_scenario(script(step("upload", user="u", file_id="F", size=1), parties=parties))


def test_honest_upload_then_read():
    trace = run(parse_scenario(script(step("upload", user="alice", file_id="F", size=32),
                                      step("read", user="alice", file_id="F"))))
    assert kinds_per_step(trace) == [
        [K.UploadInit, K.UploadAck, K.UploadDone, K.DigestAck],
        [K.ReadReq, K.ReadGrant],
    ]
    assert trace.steps[1].outcome["match"] is True
    assert trace.verdicts() == []


def test_drop_ends_in_data_loss_record():
    text = script(step("upload", user="alice", file_id="F", size=32), step("read", user="alice", file_id="F"),
                  header='[[behaviors]]\nmode = "DropAfterUpload"\nfile_id = "F"\n')
    # behaviors must precede [[parties]] tables in TOML, header is emitted first
    trace = run(parse_scenario(text))
    last = list(trace.ledger.sealed())[-1][1]
    assert last.kind is K.VerdictRecord
    assert last.payload.verdict.violation is Violation.DataLoss
    assert len(trace.steps[1].tx_ids) == 4


def test_replay_is_byte_identical():
    s = generate_script(11)
    a, b = run(s), run(s)
    assert a.ledger.serialize() == b.ledger.serialize()
    assert a.to_json() == b.to_json()


def test_seed_only_matters_for_generated_data():
    generated = parse_scenario(script(step("upload", user="alice", file_id="F", size=32)))
    inline = parse_scenario(script(step("upload", user="alice", file_id="F", data="fixed")))
    assert run(generated, seed=1).ledger.serialize() != run(generated, seed=2).ledger.serialize()
    assert run(inline, seed=1).ledger.serialize() == run(inline, seed=2).ledger.serialize()


def test_every_trace_tx_is_sealed():
    trace = run(generate_script(5))
    sealed = trace.ledger.sealed_tx_ids()
    assert all(t in sealed for rec in trace.steps for t in rec.tx_ids)
    assert trace.ledger.pending == [] and trace.ledger.verify_chain().ok


def test_step_errors_are_recorded_not_raised():
    text = script(step("upload", user="alice", file_id="F", size=4),
                  step("adjudicate", kind="missing", file_id="F"))
    trace = run(parse_scenario(text))
    assert trace.steps[1].error.startswith("MissingPrerequisiteTxs")


def test_tamper_test_step():
    text = script(step("upload", user="alice", file_id="F", size=4),
                  step("tamper_test", block=1, tx=0, offset=40, byte=255))
    trace = run(parse_scenario(text))
    assert trace.steps[1].outcome["verify"].startswith("INCONSISTENT block=1")
    assert trace.ledger.verify_chain().ok


def test_measure_and_evaluate_steps():
    sla = ('[sla]\nmetric = "response_time"\nthreshold_t = "1"\nrequired_fraction = "0.5"\n'
           "window = 3\nbase_penalty = 10\npenalty_rate = 1\n")
    steps = [step("upload", user="alice", file_id="F", size=4),
             step("measure", metric="response_time", value="0.5", ref_step=0),
             step("measure", metric="response_time", value="3", ref_step=0),
             step("measure", metric="response_time", value="4", ref_step=0),
             step("evaluate_sla", window_start=5)]
    trace = run(parse_scenario(script(*steps, parties=PARTIES + ORACLE + sla)))
    rec = trace.steps[-1]
    assert rec.error is None, rec.error
    assert rec.outcome["total"] == 3 and rec.outcome["below"] == 1
    assert rec.verdict.violation is Violation.SlaPercentileBreach
    # ceil(100 * (1/2 - 1/3)) = ceil(16.67) = 17
    assert rec.verdict.compensation == 10 + 17


@pytest.mark.parametrize("architecture, read_txs", [
    ("smart_contract", 4), ("third_party", 2), ("double_signed", 2)])
def test_architectures(architecture, read_txs):
    text = script(step("upload", user="alice", file_id="F", size=4),
                  step("read", user="alice", file_id="F"),
                  step("adjudicate", kind="missing", file_id="F"),
                  header=f'architecture = "{architecture}"\n[[behaviors]]\nmode = "DropAfterUpload"\nfile_id = "F"\n')
    trace = run(parse_scenario(text))
    assert len(trace.steps[1].tx_ids) == read_txs
    assert trace.verdicts("F")[-1].violation is Violation.DataLoss
    assert trace.ledger.verify_chain().ok
    if architecture == "double_signed":
        done = trace.ledger.query(payload_kind=K.UploadDone)[0][1]
        assert len(done.signatures) == 2


def test_dump_parse_round_trip():
    s = generate_script(3)
    for _, variant, _ in fault_matrix(s):
        assert parse_scenario(variant.dumps()) == variant


def test_fault_matrix_enumeration():
    base = parse_scenario(script(step("upload", user="alice", file_id="F", size=8),
                                 step("read", user="alice", file_id="F")))
    variants = fault_matrix(base)
    assert [name for name, _, _ in variants] == [
        "Honest", "DropAfterUpload", "AlterAfterUpload", "RetainAfterDelete", "RefuseUploadAck"]
    expected = {name: exp for name, _, exp in variants}
    assert expected["Honest"].violation is Violation.NoViolation
    assert expected["AlterAfterUpload"].violation is Violation.DataAlteration
    assert expected["AlterAfterUpload"].responsible is Role.CLOUD
    for name, variant, exp in variants:
        trace = run(variant)
        got = trace.verdicts(exp.file_id)[-1]
        assert got.violation is exp.violation, name


def test_fault_matrix_needs_upload():
    s = parse_scenario(script(step("read", user="alice", file_id="G"), header='files = ["G"]'))
    with pytest.raises(ValueError):
        fault_matrix(s)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**32))
def test_isolation_over_disjoint_files(seed_a, seed_b):
    a = generate_script(seed_a, n_files=2, n_ops=4)
    b = generate_script(seed_b, n_files=2, n_ops=4)
    rename = lambda s, tag: ScenarioScript(s.seed, s.parties, tuple(
        type(x)(**{**vars(x), "file_id": tag + x.file_id}) for x in s.steps))
    a, b = rename(a, "a-"), rename(b, "b-")
    both = ScenarioScript(0, a.parties, a.steps + b.steps)
    strip = lambda vs: sorted((v.violation, v.file_id) for v in vs)
    union = strip(run(a).verdicts() + run(b).verdicts())
    assert strip(run(both).verdicts()) == union


SAMPLES = sorted((Path(__file__).parent.parent / "scenarios").glob("*.toml"))
SAMPLE_OUTCOMES = {"drop": Violation.DataLoss, "retention": Violation.UnauthorizedRetention,
                   "sla": Violation.SlaPercentileBreach}


@pytest.mark.parametrize("path", [p for p in SAMPLES if p.stem in SAMPLE_OUTCOMES], ids=lambda p: p.stem)
def test_sample_scenarios(path):
    trace = run(parse_scenario(path.read_text()))
    assert trace.ledger.verify_chain().ok
    assert trace.steps[-1].verdict.violation is SAMPLE_OUTCOMES[path.stem]
