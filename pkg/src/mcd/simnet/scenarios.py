"""Scenario execution: honest and adversarial runs against real servers.

Every scenario is seed-deterministic: the graph, the member schedules,
all adversarial randomness, and therefore the final report derive from
the scenario seed.  Message interleaving across members is shuffled by
a separate seed and must never affect final outputs.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import asdict, dataclass, field

from ..authority import erase_master, issue_certificate, setup
from ..directory import KeyDirectory
from ..hashing import KdfParams, random_token
from ..identity import Identity
from ..keyserver import (
    KeyServer,
    KsMemberState,
    dh_keygen,
    ks_enroll_self,
    ks_expected_second,
    ks_make_submission,
    ks_run_dynamic_step,
)
from ..matching import MatchingService
from ..member import (
    ContactList,
    MemberState,
    TransportError,
    derive_directory_access_token,
    make_delete,
    make_query,
    make_submission,
    run_dynamic_step,
)
from ..netserver import (
    DirectoryWireService,
    KeyServerWireService,
    MatchingWireService,
    SimpleWireService,
    start_server,
)
from ..simple import SimpleService, attack_contact_probe, simple_token
from ..suites import TransparentSuite
from .adversary import (
    MaliciousMatchingWireService,
    forge_colluding_tuple,
    run_guessing_attacker,
)
from .graphgen import gen_graph, mark_hidden
from .oracle import ideal_oracle
from .report import Report
from .transports import Transcript, inproc_transport, socket_transport

SCENARIO_NAMES = [
    "honest_static",
    "honest_dynamic",
    "malicious_server",
    "hiding_member",
    "guessing_attacker",
    "replay",
    "simple_weakness",
    "keyserver_run",
    "keyserver_collusion",
    "directory_e2e",
]


@dataclass
class Scenario:
    name: str
    seed: int = 0
    n_identities: int = 40
    n_members: int = 16
    edge_prob: float | None = None
    degree_target: float | None = 6.0
    mutual_bias: float = 0.5
    variant: str = "main"
    transport: str = "inproc"
    pad_responses: bool = False
    rate_limit: float | None = None
    inject_budget: int = 0
    graft_budget: int = 0
    drop_budget: int = 0
    attacker_attempts: int = 0
    hider_count: int = 0
    kdf_cost: int = 0
    rounds: int = 3
    shuffle_seed: int | None = None
    log_path: str | None = None
    restart_mid_run: bool = False

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {self.name!r}")
        if self.variant not in ("main", "simple", "keyserver"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.transport not in ("inproc", "socket"):
            raise ValueError(f"unknown transport {self.transport!r}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "Scenario":
        return cls(**obj)


_DEFAULTS = {
    "malicious_server": {"inject_budget": 400, "graft_budget": 400},
    "hiding_member": {"hider_count": 3},
    "guessing_attacker": {"attacker_attempts": 200},
    "simple_weakness": {"variant": "simple", "n_identities": 20, "n_members": 20,
                        "degree_target": 5.0},
    "keyserver_run": {"variant": "keyserver"},
    "keyserver_collusion": {"variant": "keyserver"},
}


def default_scenario(name: str, seed: int = 0, **overrides) -> Scenario:
    kwargs = dict(_DEFAULTS.get(name, {}))
    kwargs.update(overrides)
    return Scenario(name=name, seed=seed, **kwargs)


class _Ctx:
    """Shared deployment for one scenario run."""

    N_EXTRAS = 4

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.rng = random.Random(f"scenario:{sc.name}:{sc.seed}")
        shuffle_seed = sc.seed if sc.shuffle_seed is None else sc.shuffle_seed
        self.shuffle_rng = random.Random(f"shuffle:{sc.name}:{shuffle_seed}")
        self.graph = gen_graph(
            sc.n_identities,
            sc.n_members,
            edge_prob=sc.edge_prob,
            degree_target=sc.degree_target,
            mutual_bias=sc.mutual_bias,
            seed=sc.seed,
        )
        self.suite = TransparentSuite()
        setup_seed = hashlib.sha256(f"setup:{sc.seed}".encode()).digest()
        self.params, master = setup("test", suite=self.suite, seed=setup_seed)
        self.enrollment = master.enrollment
        self.extra_ids = [Identity(f"+9900{i:06d}") for i in range(self.N_EXTRAS)]
        self.certs = {}
        for ident in list(self.graph.members) + self.extra_ids:
            self.certs[ident] = issue_certificate(
                master, ident, master.enrollment.proof_for(ident)
            )
        erase_master(master)
        self.transcript = Transcript()
        self._servers = []
        self.kdf_params = KdfParams(cost=sc.kdf_cost)

    # -- infrastructure -----------------------------------------------------

    def expose(self, wire_service, name: str):
        """In-proc or socket transport per the scenario setting."""
        if self.sc.transport == "socket":
            server = start_server(wire_service)
            self._servers.append(server)
            return socket_transport(server.server_address, self.transcript, name)
        return inproc_transport(wire_service, self.transcript, name)

    def matching(self, mode: str, wrapper=None, log_path=None, restore=False,
                 name: str = "matching"):
        service = MatchingService(mode, log_path=log_path, restore=restore)
        wire_service = MatchingWireService(
            service,
            pad_responses=self.sc.pad_responses,
            rate_limit=self.sc.rate_limit,
            rng=random.Random(f"pad:{self.sc.seed}"),
        )
        if wrapper is not None:
            wire_service = wrapper(wire_service)
        return service, wire_service, self.expose(wire_service, name)

    def teardown(self):
        for server in self._servers:
            server.shutdown()
            server.server_close()
        self._servers.clear()

    # -- actors ---------------------------------------------------------------

    def member_rng(self, ident: Identity) -> random.Random:
        return random.Random(f"member:{self.sc.seed}:{ident.value}")

    def contact_list(self, ident: Identity) -> ContactList:
        hidden = self.graph.hidden(ident)
        return ContactList(visible=self.graph.contacts(ident) - hidden, hidden=hidden)

    def member_states(self) -> dict[Identity, MemberState]:
        return {
            m: MemberState(m, self.certs[m], self.params, self.contact_list(m),
                           rng=self.member_rng(m))
            for m in self.graph.members
        }

    def extra_member_state(self, index: int, contacts: ContactList) -> MemberState:
        ident = self.extra_ids[index]
        return MemberState(ident, self.certs[ident], self.params, contacts,
                           rng=self.member_rng(ident))

    def ks_member_states(self) -> dict[Identity, KsMemberState]:
        return {
            m: KsMemberState(
                m,
                dh_keygen(self.suite, self.member_rng(m)),
                self.suite,
                self.contact_list(m),
                n_bits=self.params.n_bits,
                rng=self.member_rng(m),
            )
            for m in self.graph.members
        }

    def shuffled_tasks(self, states) -> list[tuple[Identity, Identity]]:
        tasks = [
            (m, c) for m in sorted(states) for c in sorted(states[m].contacts.all())
        ]
        self.shuffle_rng.shuffle(tasks)
        return tasks

    def shuffled_tasks_simple(self, member_contacts) -> list[tuple[Identity, Identity]]:
        tasks = [
            (m, c) for m in sorted(member_contacts) for c in sorted(member_contacts[m])
        ]
        self.shuffle_rng.shuffle(tasks)
        return tasks


def _expect_ok(resp: dict):
    if "err" in resp:
        raise TransportError(f"unexpected server error {resp['err']}")
    return resp


def _matches(resp: dict):
    return _expect_ok(resp).get("matches", [])


def _compare_outputs(report: Report, outputs: dict, expected: dict) -> None:
    report.outputs = {m.value: sorted(x.value for x in v) for m, v in outputs.items()}
    report.oracle = {m.value: sorted(x.value for x in v) for m, v in expected.items()}
    for m in sorted(expected):
        missing = expected[m] - outputs.get(m, set())
        extra = outputs.get(m, set()) - expected[m]
        if missing or extra:
            report.divergences.append({
                "member": m.value,
                "missing": sorted(x.value for x in missing),
                "extra": sorted(x.value for x in extra),
            })


def _check_stats(ctx: _Ctx, report: Report, transport, s_c: int, s_mc: int) -> None:
    stats = _expect_ok(transport.request({"op": "stats"}))
    report.server_stats = stats
    report.expected_stats = {"s_c": s_c, "s_mc": s_mc}
    report.check("server_counts", stats == {"s_c": s_c, "s_mc": s_mc},
                 f"got {stats}, expected s_c={s_c} s_mc={s_mc}")


def _finish(ctx: _Ctx, report: Report) -> Report:
    report.wire = {
        "messages": ctx.transcript.message_count(),
        "bytes": ctx.transcript.byte_count(),
        "per_op": ctx.transcript.op_counts(),
    }
    return report


# --- static executors -------------------------------------------------------

def _static_main(ctx: _Ctx, states, transport, advance=None):
    """Submission phase, phase flip, query phase; shuffled task order."""
    for m, c in ctx.shuffled_tasks(states):
        pair = make_submission(states[m], c)
        _expect_ok(transport.request({"op": "submit", **pair.as_wire()}))
    if advance is not None:
        transport = advance() or transport
    else:
        _expect_ok(transport.request({"op": "advance_phase"}))
    outputs = {m: set() for m in states}
    for m, c in ctx.shuffled_tasks(states):
        pair, expected = make_query(states[m], c)
        resp = transport.request({"op": "query", **pair.as_wire()})
        if any(second == expected for _, second in _matches(resp)):
            outputs[m].add(c)
            states[m].discovered.add(c)
    return outputs, transport


def _static_simple(ctx: _Ctx, member_contacts, transport):
    for m, c in ctx.shuffled_tasks_simple(member_contacts):
        tok = simple_token(c, m, ctx.kdf_params)
        _expect_ok(transport.request({"op": "simple_submit", "t": tok}))
    _expect_ok(transport.request({"op": "advance_phase"}))
    outputs = {m: set() for m in member_contacts}
    for m, c in ctx.shuffled_tasks_simple(member_contacts):
        tok = simple_token(m, c, ctx.kdf_params)
        resp = _expect_ok(transport.request({"op": "simple_query", "t": tok}))
        if resp.get("present"):
            outputs[m].add(c)
    return outputs


def _simple_tasks(self, member_contacts):
    tasks = [(m, c) for m in sorted(member_contacts) for c in sorted(member_contacts[m])]
    self.shuffle_rng.shuffle(tasks)
    return tasks


_Ctx.shuffled_tasks_simple = _simple_tasks


def _static_keyserver(ctx: _Ctx, states, key_transport, match_transport):
    enroll_order = sorted(states)
    ctx.shuffle_rng.shuffle(enroll_order)
    for m in enroll_order:
        ks_enroll_self(states[m], key_transport, ctx.enrollment.proof_for(m))
    for m, c in ctx.shuffled_tasks(states):
        pair = ks_make_submission(states[m], c, key_transport)
        _expect_ok(match_transport.request({"op": "submit", **pair.as_wire()}))
    _expect_ok(match_transport.request({"op": "advance_phase"}))
    outputs = {m: set() for m in states}
    for m, c in ctx.shuffled_tasks(states):
        pair = ks_make_submission(states[m], c, key_transport)
        expected = ks_expected_second(states[m], c, key_transport)
        resp = match_transport.request({"op": "query", **pair.as_wire()})
        if any(second == expected for _, second in _matches(resp)):
            outputs[m].add(c)
            states[m].discovered.add(c)
    return outputs


def _transcript_hygiene(ctx: _Ctx, report: Report, states) -> None:
    """Nothing but op names and fixed-length hex may reach the matching
    server; identities and raw group encodings must never appear."""
    forbidden = [m.value.encode() for m in ctx.graph.members]
    for st in states.values():
        forbidden.append(st.own_q1.enc.hex().encode())
        for token, q1c in st.token_cache.values():
            forbidden.append(token.enc.hex().encode())
            forbidden.append(q1c.enc.hex().encode())
    hits = ctx.transcript.scan(forbidden, service="matching")
    report.check("transcript_hygiene", not hits, f"{len(hits)} leaks found")

    shapes_ok = True
    from .. import wire as _wire

    for raw in ctx.transcript.requests("matching"):
        obj = _wire.decode(raw)
        if set(obj) - {"op", "t1", "t2"}:
            shapes_ok = False
        for key in ("t1", "t2"):
            if key in obj and not (len(obj[key]) == 64 and obj[key] == obj[key].lower()):
                shapes_ok = False
    report.check("request_shape", shapes_ok,
                 "matching requests carry exactly op plus hex64 tokens")


# --- scenarios ---------------------------------------------------------------

def _sc_honest_static(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    if ctx.sc.variant == "simple":
        contacts = {m: ctx.graph.contacts(m) for m in ctx.graph.members}
        service = SimpleWireService(SimpleService())
        transport = ctx.expose(service, "matching")
        outputs = _static_simple(ctx, contacts, transport)
        _compare_outputs(report, outputs, oracle.out)
        stats = _expect_ok(transport.request({"op": "stats"}))
        report.server_stats = stats
        expected_tokens = len({
            simple_token(c, m, ctx.kdf_params)
            for m in ctx.graph.members
            for c in ctx.graph.contacts(m)
        })
        report.expected_stats = {"s_c": expected_tokens, "s_mc": 0}
        report.check("server_counts", stats["s_c"] == expected_tokens,
                     f"{stats} vs {expected_tokens} tokens")
        return
    if ctx.sc.variant == "keyserver":
        key_server = KeyServer(ctx.suite, ctx.enrollment,
                               hashlib.sha256(f"phantom:{ctx.sc.seed}".encode()).digest())
        key_transport = ctx.expose(KeyServerWireService(key_server), "keys")
        _, _, match_transport = ctx.matching("static")
        states = ctx.ks_member_states()
        outputs = _static_keyserver(ctx, states, key_transport, match_transport)
        _compare_outputs(report, outputs, oracle.out)
        _check_stats(ctx, report, match_transport, oracle.s_tuples, oracle.s_mc)
        return

    service, wire_service, transport = ctx.matching(
        "static", log_path=ctx.sc.log_path
    )
    states = ctx.member_states()

    def advance():
        nonlocal transport
        if ctx.sc.restart_mid_run:
            # kill the server between the phases and restore from the log
            if ctx.sc.log_path is None:
                raise TransportError("restart requires a log path")
            service.close()
            for server in ctx._servers:
                server.shutdown()
                server.server_close()
            ctx._servers.clear()
            restored = MatchingService("static", log_path=ctx.sc.log_path, restore=True)
            new_wire = MatchingWireService(restored)
            transport = ctx.expose(new_wire, "matching")
            report.note("matching server killed and restored from its append log")
        _expect_ok(transport.request({"op": "advance_phase"}))
        return transport

    outputs, transport = _static_main(ctx, states, transport, advance)
    _compare_outputs(report, outputs, oracle.out)
    _check_stats(ctx, report, transport, oracle.s_tuples, oracle.s_mc)
    _transcript_hygiene(ctx, report, states)


def _sc_hiding_member(ctx: _Ctx, report: Report) -> None:
    mark_hidden(ctx.graph, ctx.rng, ctx.sc.hider_count or 2)
    ctx.graph.validate()
    oracle = ideal_oracle(ctx.graph)
    _, _, transport = ctx.matching("static")
    states = ctx.member_states()
    outputs, transport = _static_main(ctx, states, transport)
    _compare_outputs(report, outputs, oracle.out)
    _check_stats(ctx, report, transport, oracle.s_tuples, oracle.s_mc)

    members = set(ctx.graph.members)
    checked = 0
    for hider, hidden in ctx.graph.hidden_marks.items():
        for partner in hidden:
            if partner not in members or not ctx.graph.is_mutual(hider, partner):
                continue
            if hider in ctx.graph.hidden(partner):
                continue  # both sides hid; neither discovers
            checked += 1
            report.check(
                f"hider_discovers:{hider}:{partner}",
                partner in outputs[hider],
                "hider still discovers the partner",
            )
            report.check(
                f"partner_blind:{hider}:{partner}",
                hider not in outputs[partner],
                "partner must not discover the hider",
            )
    report.check("hiding_pairs_exercised", checked > 0, f"{checked} hidden mutual pairs")


def _sc_malicious_server(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    adversary = None

    def wrap(inner):
        nonlocal adversary
        adversary = MaliciousMatchingWireService(
            inner,
            random.Random(f"mal:{ctx.sc.seed}"),
            inject_budget=ctx.sc.inject_budget,
            graft_budget=ctx.sc.graft_budget,
            drop_budget=ctx.sc.drop_budget,
        )
        return adversary

    _, _, transport = ctx.matching("static", wrapper=wrap)
    states = ctx.member_states()
    outputs, transport = _static_main(ctx, states, transport)

    if ctx.sc.drop_budget:
        # withheld responses: outputs shrink by exactly the drop count
        sound = all(outputs[m] <= oracle.out[m] for m in oracle.out)
        report.check("drop_soundness", sound, "drops may only remove discoveries")
        missed = sum(len(oracle.out[m] - outputs[m]) for m in oracle.out)
        report.check(
            "epsilon_accounting",
            missed == adversary.dropped_match_responses,
            f"missed {missed} vs dropped {adversary.dropped_match_responses}",
        )
        report.outputs = {m.value: sorted(x.value for x in v) for m, v in outputs.items()}
        report.oracle = {m.value: sorted(x.value for x in v) for m, v in oracle.out.items()}
    else:
        _compare_outputs(report, outputs, oracle.out)
        report.check(
            "injection_budget_spent",
            adversary.injected == ctx.sc.inject_budget
            and adversary.grafted == ctx.sc.graft_budget,
            f"injected {adversary.injected}, grafted {adversary.grafted}",
        )
        false_hits = sum(len(outputs[m] - oracle.out[m]) for m in oracle.out)
        report.check("zero_false_discoveries", false_hits == 0, f"{false_hits} fakes accepted")


def _sc_guessing_attacker(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    _, _, transport = ctx.matching("static")
    states = ctx.member_states()

    attempts = ctx.sc.attacker_attempts or 100
    attacker_rng = random.Random(f"attacker:{ctx.sc.seed}")

    for m, c in ctx.shuffled_tasks(states):
        pair = make_submission(states[m], c)
        _expect_ok(transport.request({"op": "submit", **pair.as_wire()}))
    run_guessing_attacker(ctx.graph.identities, ctx.suite, transport,
                          attacker_rng, attempts, submit=True)
    _expect_ok(transport.request({"op": "advance_phase"}))

    outputs = {m: set() for m in states}
    for m, c in ctx.shuffled_tasks(states):
        pair, expected = make_query(states[m], c)
        resp = transport.request({"op": "query", **pair.as_wire()})
        if any(second == expected for _, second in _matches(resp)):
            outputs[m].add(c)
    stolen = run_guessing_attacker(ctx.graph.identities, ctx.suite, transport,
                                   attacker_rng, attempts, submit=False)

    _compare_outputs(report, outputs, oracle.out)
    report.check("attacker_discovers_nothing", not stolen, f"{len(stolen)} hits")
    _check_stats(ctx, report, transport, oracle.s_tuples + attempts, oracle.s_mc)


def _sc_replay(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    _, _, transport = ctx.matching("static")
    states = ctx.member_states()
    from .. import wire as _wire

    for m, c in ctx.shuffled_tasks(states):
        pair = make_submission(states[m], c)
        _expect_ok(transport.request({"op": "submit", **pair.as_wire()}))
    captured = [_wire.decode(raw) for raw in ctx.transcript.requests("matching")]
    for req in captured:  # replay every submission verbatim
        _expect_ok(transport.request(req))
    _expect_ok(transport.request({"op": "advance_phase"}))

    def query_pass():
        outputs = {m: set() for m in states}
        for m, c in ctx.shuffled_tasks(states):
            pair, expected = make_query(states[m], c)
            resp = transport.request({"op": "query", **pair.as_wire()})
            if any(second == expected for _, second in _matches(resp)):
                outputs[m].add(c)
        return outputs

    first_pass = query_pass()
    queries = [
        _wire.decode(raw)
        for raw in ctx.transcript.requests("matching")
        if _wire.decode(raw).get("op") == "query"
    ]
    for req in queries:  # replayed queries are answered but change nothing
        transport.request(req)
    second_pass = query_pass()

    _compare_outputs(report, first_pass, oracle.out)
    report.check(
        "replay_changes_nothing",
        first_pass == second_pass,
        "outputs identical before and after tuple replay",
    )
    _check_stats(ctx, report, transport, oracle.s_tuples, oracle.s_mc)


def _sc_honest_dynamic(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    _, _, transport = ctx.matching("dynamic")
    states = ctx.member_states()

    join_order = sorted(states)
    ctx.shuffle_rng.shuffle(join_order)

    # Staggered-pair semantics on the first mutual pair (if any): the
    # later joiner discovers immediately, the earlier on its re-query.
    mutual_pairs = sorted(ctx.graph.mutual_member_pairs())
    if mutual_pairs:
        a, b = mutual_pairs[0]
        early, late = sorted((a, b), key=join_order.index)
        report.check(
            "early_first_query_misses",
            not run_dynamic_step(states[early], late, transport),
            "nothing stored yet for the earlier querier",
        )
        report.check(
            "late_first_query_hits",
            run_dynamic_step(states[late], early, transport),
            "the later querier discovers on its first query",
        )
        report.check(
            "early_requery_hits",
            run_dynamic_step(states[early], late, transport),
            "the earlier querier discovers on re-query",
        )
        report.check(
            "requery_idempotent",
            run_dynamic_step(states[early], late, transport),
            "discovery persists across re-queries",
        )
    else:
        report.note("graph has no mutual member pair; staggered check skipped")

    # Deletion: D submits a tuple for a not-yet-member contact, deletes
    # it, and the contact joining later must never discover D.
    deleter = join_order[0]
    late_contact = ctx.extra_ids[0]
    d_contacts = ContactList(visible=set(ctx.graph.contacts(deleter)) | {late_contact})
    d_state = MemberState(deleter, ctx.certs[deleter], ctx.params, d_contacts,
                          rng=ctx.member_rng(deleter))
    run_dynamic_step(d_state, late_contact, transport)
    pair = make_delete(d_state, late_contact)
    _expect_ok(transport.request({"op": "delete", **pair.as_wire()}))
    joiner = MemberState(late_contact, ctx.certs[late_contact], ctx.params,
                         ContactList(visible={deleter}),
                         rng=ctx.member_rng(late_contact))
    never = [run_dynamic_step(joiner, deleter, transport) for _ in range(ctx.sc.rounds)]
    report.check("deleted_tuple_stays_gone", not any(never),
                 "a later joiner never discovers the deleter")

    # Deletion followed by the owner re-querying restores discoverability.
    redo = join_order[1 % len(join_order)]
    redo_contact = ctx.extra_ids[1]
    r_contacts = ContactList(visible=set(ctx.graph.contacts(redo)) | {redo_contact})
    r_state = MemberState(redo, ctx.certs[redo], ctx.params, r_contacts,
                          rng=ctx.member_rng(redo))
    run_dynamic_step(r_state, redo_contact, transport)
    pair = make_delete(r_state, redo_contact)
    _expect_ok(transport.request({"op": "delete", **pair.as_wire()}))
    report.check("requery_restores_tuple",
                 not run_dynamic_step(r_state, redo_contact, transport),
                 "owner re-query re-adds the tuple without a match yet")
    rejoiner = MemberState(redo_contact, ctx.certs[redo_contact], ctx.params,
                           ContactList(visible={redo}),
                           rng=ctx.member_rng(redo_contact))
    report.check("partner_discovers_after_restore",
                 run_dynamic_step(rejoiner, redo, transport),
                 "re-added tuple is discoverable again")
    report.check("owner_discovers_after_restore",
                 run_dynamic_step(r_state, redo_contact, transport),
                 "owner sees the partner's tuple on the next round")

    # Main rounds: everyone repeatedly queries undiscovered contacts.
    outputs = {m: set(states[m].discovered) for m in states}
    for joined_upto in range(len(join_order)):
        m = join_order[joined_upto]
        for c in sorted(states[m].contacts.all()):
            if run_dynamic_step(states[m], c, transport):
                outputs[m].add(c)
    for _ in range(max(1, ctx.sc.rounds - 1)):
        tasks = [
            (m, c)
            for m in join_order
            for c in sorted(states[m].contacts.all())
            if c not in outputs[m]
        ]
        ctx.shuffle_rng.shuffle(tasks)
        for m, c in tasks:
            if run_dynamic_step(states[m], c, transport):
                outputs[m].add(c)

    _compare_outputs(report, outputs, oracle.out)


def _sc_simple_weakness(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    contacts = {m: ctx.graph.contacts(m) for m in ctx.graph.members}
    service = SimpleWireService(SimpleService())
    transport = ctx.expose(service, "matching")
    outputs = _static_simple(ctx, contacts, transport)
    _compare_outputs(report, outputs, oracle.out)

    # The documented leak: anyone can test a directed contact edge.
    members = list(ctx.graph.members)
    true_hits = probes = false_hits = 0
    for a in members:
        for b in members:
            if a == b:
                continue
            probes += 1
            hit = attack_contact_probe((a, b), transport, ctx.kdf_params)
            if a in ctx.graph.contacts(b):
                true_hits += hit
            else:
                false_hits += hit
    edge_count = sum(
        1 for b in members for a in ctx.graph.contacts(b) if a in set(members)
    )
    report.check("probe_hits_every_edge", true_hits == edge_count,
                 f"{true_hits}/{edge_count} directed member edges probed true")
    report.check("probe_silent_on_non_edges", false_hits == 0,
                 f"{false_hits} false probe hits over {probes} probes")


def _sc_keyserver_run(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    phantom_secret = hashlib.sha256(f"phantom:{ctx.sc.seed}".encode()).digest()
    key_server = KeyServer(ctx.suite, ctx.enrollment, phantom_secret)
    key_transport = ctx.expose(KeyServerWireService(key_server), "keys")
    _, _, ks_match = ctx.matching("static", name="matching")
    ks_states = ctx.ks_member_states()
    ks_outputs = _static_keyserver(ctx, ks_states, key_transport, ks_match)
    _compare_outputs(report, ks_outputs, oracle.out)
    _check_stats(ctx, report, ks_match, oracle.s_tuples, oracle.s_mc)

    # cross-protocol agreement: the certificate protocol on the same graph
    _, _, main_match = ctx.matching("static", name="matching-alt")
    main_states = ctx.member_states()
    main_outputs, _ = _static_main(ctx, main_states, main_match)
    report.check("matches_main_protocol", main_outputs == ks_outputs,
                 "key-server variant and certificate protocol agree")

    # phantom keys: stable across fetches, same shape as enrolled keys
    ghost = Identity("+77700001111")
    responses = {key_transport.request({"op": "getkey", "id": ghost.value})["key"]
                 for _ in range(100)}
    report.check("phantom_stable", len(responses) == 1, "100 fetches, one key")
    enrolled_member = sorted(ks_states)[0]
    enrolled_resp = key_transport.request({"op": "getkey", "id": enrolled_member.value})
    phantom_resp = key_transport.request({"op": "getkey", "id": ghost.value})
    report.check(
        "phantom_shape_uniform",
        set(enrolled_resp) == set(phantom_resp) == {"key"}
        and len(enrolled_resp["key"]) == len(phantom_resp["key"]),
        "enrolled and phantom responses are byte-shape identical",
    )

    # fetching a phantom contact looks exactly like a non-mutual member
    fetcher = sorted(ks_states)[0]
    state = ks_states[fetcher]
    ghost_state = KsMemberState(
        fetcher, state.keypair, ctx.suite,
        ContactList(visible={ghost}), rng=ctx.member_rng(fetcher),
    )
    pair = ks_make_submission(ghost_state, ghost, key_transport)
    resp_ghost = ks_match.request({"op": "query", **pair.as_wire()})
    report.check("phantom_query_indistinguishable", resp_ghost == {"matches": []},
                 "unenrolled contact behaves like any non-mutual contact")


def _sc_keyserver_collusion(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    phantom_secret = hashlib.sha256(f"phantom:{ctx.sc.seed}".encode()).digest()
    key_server = KeyServer(ctx.suite, ctx.enrollment, phantom_secret)
    key_transport = ctx.expose(KeyServerWireService(key_server), "keys")
    match_service, _, match_transport = ctx.matching("static")

    victim = ctx.graph.members[0]
    target = Identity("+66600002222")  # never a member, never enrolled
    ctx.graph.out_edges[victim].add(target)

    ks_states = ctx.ks_member_states()
    outputs = _static_keyserver(ctx, ks_states, key_transport, match_transport)
    report.check("honest_run_excludes_target",
                 target not in outputs[victim],
                 "unenrolled non-member is undiscoverable while servers are honest")

    forged = forge_colluding_tuple(key_server, match_service.store, victim, target)
    expected = ks_expected_second(ks_states[victim], target, key_transport)
    report.check("forgery_predicts_expected_value", forged == expected,
                 "colluding servers compute the victim's verification value")

    pair = ks_make_submission(ks_states[victim], target, key_transport)
    resp = match_transport.request({"op": "query", **pair.as_wire()})
    fooled = any(second == expected for _, second in _matches(resp))
    report.check("collusion_breaks_security", fooled,
                 "victim now accepts the forged mutual contact")
    report.note("demonstrates the documented non-collusion requirement for "
                "the key-server variant")
    report.outputs = {victim.value: sorted(x.value for x in outputs[victim] | {target})}
    report.oracle = {victim.value: sorted(x.value for x in oracle.out[victim])}


def _sc_directory_e2e(ctx: _Ctx, report: Report) -> None:
    oracle = ideal_oracle(ctx.graph)
    _, _, match_transport = ctx.matching("static")
    directory = KeyDirectory(ctx.enrollment)
    dir_transport = ctx.expose(DirectoryWireService(directory), "directory")

    states = ctx.member_states()
    outputs, match_transport = _static_main(ctx, states, match_transport)
    _compare_outputs(report, outputs, oracle.out)

    pubkeys = {
        m: hashlib.sha256(b"dirkey" + m.encode()).digest() for m in states
    }
    for m in sorted(states):
        gates = [make_submission(states[m], c).second
                 for c in sorted(states[m].contacts.all())]
        resp = dir_transport.request({
            "op": "dir_put",
            "id": m.value,
            "key": pubkeys[m].hex(),
            "gates": gates,
            "proof": ctx.enrollment.proof_for(m).hex(),
        })
        _expect_ok(resp)

    fetches = successes = 0
    for m in sorted(states):
        for partner in sorted(outputs[m]):
            fetches += 1
            token = derive_directory_access_token(states[m], partner)
            resp = dir_transport.request({
                "op": "dir_get", "id": partner.value, "token": token,
            })
            if resp.get("key") == pubkeys[partner].hex():
                successes += 1
    report.check("every_mutual_pair_can_fetch", fetches == successes,
                 f"{successes}/{fetches} gated fetches released the key")
    report.check("pairs_exercised", fetches > 0, f"{fetches} fetches")

    rng = random.Random(f"dirprobe:{ctx.sc.seed}")
    denials = set()
    denied = 0
    target = sorted(states)[0]
    for _ in range(300):
        resp = dir_transport.request({
            "op": "dir_get", "id": target.value, "token": random_token(rng),
        })
        if resp == {"err": "denied"}:
            denied += 1
            denials.add(repr(resp))
    missing = dir_transport.request({
        "op": "dir_get", "id": "+00000000000", "token": random_token(rng),
    })
    denials.add(repr(missing))
    report.check("random_tokens_all_denied", denied == 300, f"{denied}/300 denied")
    report.check("uniform_denial", denials == {repr({"err": "denied"})},
                 "no-record and bad-token denials are identical")


_SCENARIOS = {
    "honest_static": _sc_honest_static,
    "honest_dynamic": _sc_honest_dynamic,
    "malicious_server": _sc_malicious_server,
    "hiding_member": _sc_hiding_member,
    "guessing_attacker": _sc_guessing_attacker,
    "replay": _sc_replay,
    "simple_weakness": _sc_simple_weakness,
    "keyserver_run": _sc_keyserver_run,
    "keyserver_collusion": _sc_keyserver_collusion,
    "directory_e2e": _sc_directory_e2e,
}


def run_scenario(sc: Scenario) -> Report:
    """Execute a scenario and return its report; infrastructure failures
    mark the report invalid rather than failed."""
    report = Report(scenario=sc.name, seed=sc.seed, variant=sc.variant)
    ctx = _Ctx(sc)
    try:
        _SCENARIOS[sc.name](ctx, report)
    except TransportError as exc:
        report.valid = False
        report.note(f"infrastructure failure: {exc}")
    finally:
        _finish(ctx, report)
        ctx.teardown()
    return report
