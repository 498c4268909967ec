"""Seeded scenario scripts: parsing, deterministic execution, fault variants.

A scenario is a TOML document::

    seed = 7
    architecture = "smart_contract"   # or "third_party", "double_signed"
    max_block_size = 16
    files = ["never-uploaded"]        # file ids usable without an upload step

    [[parties]]
    role = "User"
    label = "alice"
    # ... exactly one Cloud and one Contract, an Oracle if measuring

    [[behaviors]]
    mode = "DropAfterUpload"
    file_id = "F"

    [sla]                             # optional, see SlaSpec
    ...

    [[steps]]
    op = "upload"                     # upload | delete | read | measure |
    user = "alice"                    # evaluate_sla | adjudicate | tamper_test
    file_id = "F"
    size = 64                         # or data = "inline text"

Unknown keys are rejected everywhere.  The seed only drives generated file
contents; keys, nonces and logical times are independent of it.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Union

from .actors import Channel
from .arbitrator import OutOfBandCopyFound, adjudicate, record_verdict
from .ledger import Ledger
from .payloads import PayloadKind, Role, Verdict, Violation
from .protocol import (
    BehaviorMode,
    Cloud,
    CloudBehavior,
    CloudRefused,
    Contract,
    Mutation,
    User,
    run_delete,
    run_read,
    run_upload,
)
from .actors import Actor
from .sla_oracle import DEFAULT_SLA, SlaSchemaError, SlaSpec, evaluate_window, post_measurement, to_fraction

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

ARCHITECTURES = ("smart_contract", "third_party", "double_signed")
DISPUTE_KINDS = ("missing", "altered", "retention")
# Transactions that certify an agreement carry both parties' signatures.
DOUBLE_SIGNED_KINDS = frozenset({PayloadKind.UploadDone, PayloadKind.DigestAck, PayloadKind.DeleteAck})


class ScenarioError(ValueError):
    def __init__(self, message: str, where: str = "", line: int | None = None) -> None:
        self.where = where
        self.line = line
        loc = where
        if line is not None:
            loc = f"line {line}" + (f", {where}" if where else "")
        super().__init__(f"{loc}: {message}" if loc else message)


class SchemaError(ScenarioError):
    pass


class DanglingReference(ScenarioError):
    pass


# -- script model ---------------------------------------------------------

@dataclass(frozen=True)
class PartySpec:
    role: Role
    label: str


@dataclass(frozen=True)
class Upload:
    user: str
    file_id: str
    size: int | None = None
    data: bytes | None = None
    reject_digest: bool = False
    op = "upload"


@dataclass(frozen=True)
class Delete:
    user: str
    file_id: str
    op = "delete"


@dataclass(frozen=True)
class Read:
    user: str
    file_id: str
    op = "read"


@dataclass(frozen=True)
class Measure:
    metric: str
    value: Fraction
    ref_step: int
    oracle: str | None = None
    op = "measure"


@dataclass(frozen=True)
class EvaluateSla:
    window_start: int
    op = "evaluate_sla"


@dataclass(frozen=True)
class Adjudicate:
    kind: str
    file_id: str
    op = "adjudicate"


@dataclass(frozen=True)
class TamperTest:
    block: int
    tx: int
    offset: int
    byte: int
    op = "tamper_test"


Step = Union[Upload, Delete, Read, Measure, EvaluateSla, Adjudicate, TamperTest]


@dataclass(frozen=True)
class ScenarioScript:
    seed: int
    parties: tuple[PartySpec, ...]
    steps: tuple[Step, ...]
    behaviors: tuple[CloudBehavior, ...] = ()
    sla: SlaSpec | None = None
    architecture: str = "smart_contract"
    max_block_size: int = 16
    files: tuple[str, ...] = ()

    def label_of(self, role: Role) -> str:
        return next(p.label for p in self.parties if p.role is role)

    def dumps(self) -> str:
        return dump_scenario(self)


# -- parsing --------------------------------------------------------------

_STEP_FIELDS: dict[str, tuple[set[str], set[str]]] = {
    # op -> (required, optional)
    "upload": ({"user", "file_id"}, {"size", "data", "reject_digest"}),
    "delete": ({"user", "file_id"}, set()),
    "read": ({"user", "file_id"}, set()),
    "measure": ({"metric", "value", "ref_step"}, {"oracle"}),
    "evaluate_sla": ({"window_start"}, set()),
    "adjudicate": ({"kind", "file_id"}, set()),
    "tamper_test": ({"block", "tx", "offset", "byte"}, set()),
}
_TOP_FIELDS = {"seed", "parties", "behaviors", "sla", "steps", "architecture", "max_block_size", "files"}


def _check_keys(table: Any, where: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(table, dict):
        raise SchemaError("expected a table", where)
    unknown = sorted(set(table) - required - optional)
    if unknown:
        raise SchemaError(f"unknown key(s) {', '.join(unknown)}", where)
    missing = sorted(required - set(table))
    if missing:
        raise SchemaError(f"missing key(s) {', '.join(missing)}", where)
    return table


def _int(table: dict, key: str, where: str, lo: int = 0, hi: int | None = None) -> int:
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < lo or (hi is not None and v > hi):
        bound = f"{lo}..{hi}" if hi is not None else f">= {lo}"
        raise SchemaError(f"expected an integer {bound}", f"{where}.{key}")
    return v


def _str(table: dict, key: str, where: str) -> str:
    v = table[key]
    if not isinstance(v, str) or not v:
        raise SchemaError("expected a non-empty string", f"{where}.{key}")
    return v


def _parse_step(raw: Any, i: int) -> Step:
    where = f"steps[{i}]"
    if not isinstance(raw, dict) or "op" not in raw:
        raise SchemaError("each step needs an 'op'", where)
    op = raw["op"]
    if op not in _STEP_FIELDS:
        raise SchemaError(f"unknown op {op!r}", f"{where}.op")
    required, optional = _STEP_FIELDS[op]
    t = _check_keys(raw, where, required | {"op"}, optional)
    if op == "upload":
        if ("size" in t) == ("data" in t):
            raise SchemaError("upload needs exactly one of size or data", where)
        reject = t.get("reject_digest", False)
        if not isinstance(reject, bool):
            raise SchemaError("expected a boolean", f"{where}.reject_digest")
        if "data" in t:
            if not isinstance(t["data"], str):
                raise SchemaError("expected a string", f"{where}.data")
            return Upload(_str(t, "user", where), _str(t, "file_id", where),
                          data=t["data"].encode("utf-8"), reject_digest=reject)
        return Upload(_str(t, "user", where), _str(t, "file_id", where),
                      size=_int(t, "size", where), reject_digest=reject)
    if op == "delete":
        return Delete(_str(t, "user", where), _str(t, "file_id", where))
    if op == "read":
        return Read(_str(t, "user", where), _str(t, "file_id", where))
    if op == "measure":
        try:
            value = to_fraction(t["value"], f"{where}.value")
        except SlaSchemaError as exc:
            raise SchemaError(str(exc), f"{where}.value") from None
        if value < 0:
            raise SchemaError("measurements are non-negative", f"{where}.value")
        oracle = _str(t, "oracle", where) if "oracle" in t else None
        return Measure(_str(t, "metric", where), value, _int(t, "ref_step", where), oracle)
    if op == "evaluate_sla":
        return EvaluateSla(_int(t, "window_start", where))
    if op == "adjudicate":
        kind = _str(t, "kind", where)
        if kind not in DISPUTE_KINDS:
            raise SchemaError(f"kind must be one of {', '.join(DISPUTE_KINDS)}", f"{where}.kind")
        return Adjudicate(kind, _str(t, "file_id", where))
    return TamperTest(_int(t, "block", where), _int(t, "tx", where),
                      _int(t, "offset", where), _int(t, "byte", where, 0, 255))


def _parse_behavior(raw: Any, i: int) -> CloudBehavior:
    where = f"behaviors[{i}]"
    t = _check_keys(raw, where, {"mode", "file_id"}, {"offset", "xor"})
    try:
        mode = BehaviorMode(t["mode"])
    except ValueError:
        raise SchemaError(f"unknown mode {t['mode']!r}", f"{where}.mode") from None
    if mode is BehaviorMode.Honest:
        raise SchemaError("Honest is the default and is not listed", f"{where}.mode")
    if ("offset" in t or "xor" in t) and mode is not BehaviorMode.AlterAfterUpload:
        raise SchemaError("offset/xor only apply to AlterAfterUpload", where)
    mutation = Mutation(
        _int(t, "offset", where) if "offset" in t else 0,
        _int(t, "xor", where, 1, 255) if "xor" in t else 0x01,
    )
    return CloudBehavior(mode, _str(t, "file_id", where), mutation)


def parse_scenario(source: bytes | str) -> ScenarioScript:
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(str(exc)) from None
    _check_keys(doc, "scenario", {"seed", "parties", "steps"}, _TOP_FIELDS - {"seed", "parties", "steps"})
    seed = _int(doc, "seed", "scenario", 0, 2**64 - 1)

    architecture = doc.get("architecture", "smart_contract")
    if architecture not in ARCHITECTURES:
        raise SchemaError(f"must be one of {', '.join(ARCHITECTURES)}", "architecture")
    max_block_size = _int(doc, "max_block_size", "scenario", 1) if "max_block_size" in doc else 16

    files = doc.get("files", [])
    if not isinstance(files, list) or not all(isinstance(f, str) and f for f in files):
        raise SchemaError("expected a list of non-empty strings", "files")

    if not isinstance(doc["parties"], list) or not doc["parties"]:
        raise SchemaError("expected a non-empty array of tables", "parties")
    parties = []
    for i, raw in enumerate(doc["parties"]):
        where = f"parties[{i}]"
        t = _check_keys(raw, where, {"role", "label"})
        try:
            role = Role.parse(str(t["role"]))
        except ValueError as exc:
            raise SchemaError(str(exc), f"{where}.role") from None
        parties.append(PartySpec(role, _str(t, "label", where)))
    labels = [p.label for p in parties]
    dupes = sorted({x for x in labels if labels.count(x) > 1})
    if dupes:
        raise SchemaError(f"duplicate party label(s) {', '.join(dupes)}", "parties")
    for role in (Role.CLOUD, Role.CONTRACT):
        n = sum(p.role is role for p in parties)
        if n != 1:
            raise SchemaError(f"exactly one {role.title} party required, found {n}", "parties")
    if not any(p.role is Role.USER for p in parties):
        raise SchemaError("at least one User party required", "parties")

    sla = None
    if "sla" in doc:
        try:
            sla = SlaSpec.from_mapping(doc["sla"]) if isinstance(doc["sla"], dict) else None
        except SlaSchemaError as exc:
            raise SchemaError(str(exc), "sla") from None
        if sla is None:
            raise SchemaError("expected a table", "sla")

    if not isinstance(doc["steps"], list):
        raise SchemaError("expected an array of tables", "steps")
    steps = [_parse_step(raw, i) for i, raw in enumerate(doc["steps"])]

    raw_behaviors = doc.get("behaviors", [])
    if not isinstance(raw_behaviors, list):
        raise SchemaError("expected an array of tables", "behaviors")
    behaviors = [_parse_behavior(raw, i) for i, raw in enumerate(raw_behaviors)]

    script = ScenarioScript(seed, tuple(parties), tuple(steps), tuple(behaviors), sla,
                            architecture, max_block_size, tuple(files))
    validate_references(script)
    return script


def validate_references(script: ScenarioScript) -> None:
    by_label = {p.label: p.role for p in script.parties}
    known = set(script.files)
    all_files = known | {s.file_id for s in script.steps if isinstance(s, Upload)}
    seen_behavior = set()
    for i, b in enumerate(script.behaviors):
        if b.file_id not in all_files:
            raise DanglingReference(f"unknown file_id {b.file_id!r}", f"behaviors[{i}].file_id")
        if b.file_id in seen_behavior:
            raise SchemaError(f"second behavior for file {b.file_id!r}", f"behaviors[{i}]")
        seen_behavior.add(b.file_id)
    for i, s in enumerate(script.steps):
        where = f"steps[{i}]"
        if hasattr(s, "user") and by_label.get(s.user) is not Role.USER:
            raise DanglingReference(f"no User party labelled {s.user!r}", f"{where}.user")
        if isinstance(s, Upload):
            known.add(s.file_id)
        elif hasattr(s, "file_id") and s.file_id not in known:
            raise DanglingReference(f"file_id {s.file_id!r} is neither declared nor uploaded earlier",
                                    f"{where}.file_id")
        if isinstance(s, Measure):
            if not s.ref_step < i or not isinstance(script.steps[s.ref_step], (Upload, Delete, Read)):
                raise DanglingReference("ref_step must name an earlier upload/delete/read step",
                                        f"{where}.ref_step")
            oracles = [p.label for p in script.parties if p.role is Role.ORACLE]
            if s.oracle is None and not oracles:
                raise SchemaError("measure steps need an Oracle party", where)
            if s.oracle is not None and s.oracle not in oracles:
                raise DanglingReference(f"no Oracle party labelled {s.oracle!r}", f"{where}.oracle")
        if isinstance(s, EvaluateSla) and script.sla is None:
            raise SchemaError("evaluate_sla needs an [sla] table", where)


# -- dumping --------------------------------------------------------------

def _toml_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return json.dumps(str(v))
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return json.dumps(str(v), ensure_ascii=False)


def dump_scenario(script: ScenarioScript) -> str:
    lines = [f"seed = {script.seed}", f"architecture = {_toml_value(script.architecture)}",
             f"max_block_size = {script.max_block_size}"]
    if script.files:
        lines.append(f"files = {_toml_value(list(script.files))}")
    for p in script.parties:
        lines += ["", "[[parties]]", f"role = {_toml_value(p.role.title)}", f"label = {_toml_value(p.label)}"]
    for b in script.behaviors:
        lines += ["", "[[behaviors]]", f"mode = {_toml_value(b.mode.value)}", f"file_id = {_toml_value(b.file_id)}"]
        if b.mode is BehaviorMode.AlterAfterUpload:
            lines += [f"offset = {b.mutation.offset}", f"xor = {b.mutation.xor}"]
    if script.sla is not None:
        lines += ["", "[sla]"] + script.sla.dumps().splitlines()
    for s in script.steps:
        lines += ["", "[[steps]]", f"op = {_toml_value(s.op)}"]
        for name, value in vars(s).items():
            if value is None or (name == "reject_digest" and not value):
                continue
            if name == "data":
                value = value.decode("utf-8")
            lines.append(f"{name} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


# -- execution ------------------------------------------------------------

@dataclass
class StepRecord:
    index: int
    op: str
    tx_ids: list[bytes] = field(default_factory=list)
    offchain: list[str] = field(default_factory=list)
    outcome: dict[str, Any] = field(default_factory=dict)
    verdict: Verdict | None = None
    evidence: OutOfBandCopyFound | None = None
    error: str | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "index": self.index,
            "op": self.op,
            "tx_ids": [t.hex() for t in self.tx_ids],
            "offchain": self.offchain,
            "outcome": self.outcome,
        }
        if self.verdict is not None:
            out["verdict"] = self.verdict.report_line()
        if self.evidence is not None:
            out["evidence"] = {"file_id": self.evidence.file_id,
                               "ciphertext_hex": self.evidence.ciphertext.hex(),
                               "provenance": self.evidence.provenance}
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class RunTrace:
    seed: int
    steps: list[StepRecord]
    ledger: Ledger

    def verdicts(self, file_id: str | None = None) -> list[Verdict]:
        return [r.verdict for r in self.steps
                if r.verdict is not None and (file_id is None or r.verdict.file_id == file_id)]

    def to_json(self) -> str:
        doc = {"seed": self.seed, "steps": [r.to_json() for r in self.steps]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


class _Engine:
    def __init__(self, script: ScenarioScript, seed: int) -> None:
        self.script = script
        self.sla = script.sla or DEFAULT_SLA
        self.rng = random.Random(seed)
        kinds = DOUBLE_SIGNED_KINDS if script.architecture == "double_signed" else frozenset()
        self.channel = Channel(Ledger(double_signed_kinds=kinds), max_block_size=script.max_block_size)
        self.actors: dict[str, Actor] = {}
        for p in script.parties:
            if p.role is Role.USER:
                actor = User.create(p.label)
            elif p.role is Role.CLOUD:
                actor = Cloud.create(p.label)
            elif p.role is Role.CONTRACT:
                actor = Contract.create(p.label)
            else:
                actor = Actor.create(p.role, p.label)
            self.actors[p.label] = actor
        self.cloud: Cloud = self.actors[script.label_of(Role.CLOUD)]
        self.contract: Contract = self.actors[script.label_of(Role.CONTRACT)]
        for b in script.behaviors:
            self.cloud.set_behavior(b)
        self.channel.register(*self.actors.values())
        self.channel.seal()  # genesis
        self.records: list[StepRecord] = []

    @property
    def on_chain_contract(self) -> Contract | None:
        return self.contract if self.script.architecture == "smart_contract" else None

    def run(self) -> RunTrace:
        for i, step in enumerate(self.script.steps):
            rec = StepRecord(i, step.op)
            before = len(self.channel.posted)
            try:
                getattr(self, f"_do_{step.op}")(step, rec)
            except Exception as exc:  # recorded, never thrown
                rec.error = f"{type(exc).__name__}: {exc}"
            self.channel.seal()
            rec.tx_ids = self.channel.posted[before:]
            self.records.append(rec)
        self.channel.seal()
        return RunTrace(self.script.seed, self.records, self.channel.ledger)

    def _do_upload(self, step: Upload, rec: StepRecord) -> None:
        data = step.data if step.data is not None else self.rng.randbytes(step.size)
        user: User = self.actors[step.user]
        user.reject_digests = step.reject_digest
        try:
            out = run_upload(user, self.cloud, self.channel, step.file_id, data)
        except CloudRefused as exc:
            rec.outcome = {"file_id": step.file_id, "completed_step": exc.outcome.completed_step,
                           "refused": True}
            return
        finally:
            user.reject_digests = False
        rec.offchain.append(f"ciphertext transfer {step.user}->{self.cloud.label} ({len(data)} bytes)")
        rec.outcome = {"file_id": step.file_id, "completed_step": out.completed_step,
                       "accepted": out.accepted, "digest": out.digest.hex()}

    def _do_delete(self, step: Delete, rec: StepRecord) -> None:
        out = run_delete(self.actors[step.user], self.cloud, self.channel, step.file_id)
        rec.outcome = {"file_id": step.file_id, "retained": out.retained}

    def _do_read(self, step: Read, rec: StepRecord) -> None:
        out = run_read(self.actors[step.user], self.cloud, self.channel, step.file_id,
                       self.on_chain_contract)
        rec.outcome = {"file_id": step.file_id, "found": out.found}
        if out.found:
            rec.offchain.append(f"fetch {out.url}")
            rec.outcome["match"] = out.match
        rec.verdict = out.verdict

    def _do_measure(self, step: Measure, rec: StepRecord) -> None:
        ref = self.records[step.ref_step]
        if not ref.tx_ids:
            raise ValueError(f"step {step.ref_step} produced no operation transaction")
        label = step.oracle or next(p.label for p in self.script.parties if p.role is Role.ORACLE)
        post_measurement(self.channel, self.actors[label], step.metric, ref.tx_ids[0], step.value,
                         self.contract.pseudonym)
        rec.outcome = {"metric": step.metric, "value": str(step.value)}

    def _do_evaluate_sla(self, step: EvaluateSla, rec: StepRecord) -> None:
        self.channel.seal()
        result = evaluate_window(self.channel.ledger, self.sla, step.window_start)
        rec.outcome = {"window": [result.start, result.end], "total": result.total,
                       "below": result.below, "compliant": result.compliant}
        self._conclude(result.verdict, rec)

    def _do_adjudicate(self, step: Adjudicate, rec: StepRecord) -> None:
        self.channel.seal()
        evidence = None
        if step.kind == "retention":
            held = self.cloud.storage.get(step.file_id)
            if held is None:
                rec.offchain.append(f"inspection of {self.cloud.label}: no copy of {step.file_id}")
                rec.outcome = {"file_id": step.file_id, "copy_found": False}
                self._conclude(Verdict(Violation.NoViolation, None, 0, (), step.file_id), rec)
                return
            evidence = OutOfBandCopyFound(step.file_id, held.ciphertext,
                                          f"inspection of {self.cloud.label} storage")
            rec.evidence = evidence
            rec.offchain.append(f"inspection of {self.cloud.label}: copy of {step.file_id} found")
        rec.outcome = {"file_id": step.file_id, "kind": step.kind}
        verdict = adjudicate(self.channel.ledger, step.kind, step.file_id, self.script.sla, evidence)
        self._conclude(verdict, rec)

    def _do_tamper_test(self, step: TamperTest, rec: StepRecord) -> None:
        self.channel.seal()
        result = self.channel.ledger.tamper(step.block, step.tx, step.offset, step.byte).verify_chain()
        rec.outcome = {"verify": str(result)}

    def _conclude(self, verdict: Verdict, rec: StepRecord) -> None:
        rec.verdict = verdict
        if self.on_chain_contract is not None:
            record_verdict(self.channel, self.contract, verdict)


def run(script: ScenarioScript, seed: int | None = None) -> RunTrace:
    """Execute a script; one block is sealed per step.  Step errors land in the trace."""
    return _Engine(script, script.seed if seed is None else seed).run()


# -- fault matrix and generated scripts ------------------------------------

@dataclass(frozen=True)
class ExpectedVerdict:
    violation: Violation
    responsible: Role | None
    file_id: str


FAULT_VARIANTS = ("Honest", "DropAfterUpload", "AlterAfterUpload", "RetainAfterDelete", "RefuseUploadAck")


def fault_matrix(base: ScenarioScript) -> list[tuple[str, ScenarioScript, ExpectedVerdict]]:
    """Variants of ``base`` with a fault on its first uploaded file, plus the verdict each must yield.

    Each variant appends a fresh upload of the target file followed by the
    steps that surface the fault, so earlier history cannot mask it.
    """
    uploads = [s for s in base.steps if isinstance(s, Upload)]
    if not uploads:
        raise ValueError("the base script needs at least one upload")
    first = uploads[0]
    f, user = first.file_id, first.user
    fresh = replace(first, reject_digest=False)
    others = tuple(b for b in base.behaviors if b.file_id != f)
    plans = {
        "Honest": ((), [fresh, Read(user, f), Adjudicate("altered", f)],
                   ExpectedVerdict(Violation.NoViolation, None, f)),
        "DropAfterUpload": ((CloudBehavior(BehaviorMode.DropAfterUpload, f),),
                            [fresh, Read(user, f), Adjudicate("missing", f)],
                            ExpectedVerdict(Violation.DataLoss, Role.CLOUD, f)),
        "AlterAfterUpload": ((CloudBehavior(BehaviorMode.AlterAfterUpload, f),),
                             [fresh, Read(user, f), Adjudicate("altered", f)],
                             ExpectedVerdict(Violation.DataAlteration, Role.CLOUD, f)),
        "RetainAfterDelete": ((CloudBehavior(BehaviorMode.RetainAfterDelete, f),),
                              [fresh, Delete(user, f), Adjudicate("retention", f)],
                              ExpectedVerdict(Violation.UnauthorizedRetention, Role.CLOUD, f)),
        "RefuseUploadAck": ((CloudBehavior(BehaviorMode.RefuseUploadAck, f),),
                            [fresh, Read(user, f), Adjudicate("missing", f)],
                            ExpectedVerdict(Violation.NoViolation, None, f)),
    }
    out = []
    for name in FAULT_VARIANTS:
        behaviors, extra, expected = plans[name]
        variant = replace(base, behaviors=others + behaviors, steps=base.steps + tuple(extra))
        out.append((name, variant, expected))
    return out


def generate_script(seed: int, n_files: int = 3, n_ops: int = 8,
                    architecture: str = "smart_contract") -> ScenarioScript:
    """A random honest script: uploads of every file, then a mix of reads, deletes and re-uploads."""
    rng = random.Random(seed)
    users = ("alice", "bob")
    parties = tuple(PartySpec(Role.USER, u) for u in users) + (
        PartySpec(Role.CLOUD, "cloud"), PartySpec(Role.CONTRACT, "contract"), PartySpec(Role.ORACLE, "oracle"))
    owner = {f"f{i}": rng.choice(users) for i in range(n_files)}
    steps: list[Step] = [Upload(u, f, size=rng.randrange(0, 257)) for f, u in owner.items()]
    for _ in range(n_ops):
        f = rng.choice(sorted(owner))
        op = rng.choice(("read", "read", "delete", "upload", "adjudicate"))
        if op == "read":
            steps.append(Read(owner[f], f))
        elif op == "delete":
            steps.append(Delete(owner[f], f))
        elif op == "upload":
            steps.append(Upload(owner[f], f, size=rng.randrange(0, 257)))
        else:
            steps.append(Adjudicate(rng.choice(("missing", "altered")), f))
    return ScenarioScript(seed, parties, tuple(steps), architecture=architecture)
