"""Builders for the canonical strategy-proof mechanisms at desk scale.

Each builder produces an `Scf` (type spaces, outcome lotteries, utilities)
over a small finite domain:

* second-price auction on a value grid, uniform tie-breaking;
* top trading cycles for a housing market (strict orders, rank utilities);
* pivotal (Clarke) mechanism for a binary public project with net valuations;
* student-proposing deferred acceptance for school seats;
* uniform rationing rule for a divisible good with single-peaked preferences;
* median voting on a grid of alternatives, odd voter count, no phantoms.

Ordinal mechanisms get rank-based integer utilities (top = number of
objects, ..., bottom = 1): any cardinalization consistent with the strict
order preserves dominance, and ranks keep everything exact.

Two bespoke constructions used in the analysis of enlarged message spaces
and of correspondences live here too (`build_indifference_dictatorship`
a.k.a. example 1 of the enlargement analysis, and `build_two_agent_correspondence`).
"""
from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

from .games import (GameError, Mechanism, OutcomeLottery, UtilityTable,
                    as_fraction)
from .scf import Scf, is_strategy_proof


def _agent_names(n: int) -> tuple[str, ...]:
    if n > 26:
        raise GameError("builders support at most 26 agents")
    return tuple(string.ascii_uppercase[:n])


def _grid(values: Sequence) -> tuple[Fraction, ...]:
    grid = tuple(as_fraction(v) for v in values)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise GameError("grid must be strictly increasing")
    return grid


# ---------------------------------------------------------------------------
# second-price auction

@dataclass(frozen=True)
class AuctionSpec:
    """Sealed-bid auction: `n_bidders` agents, bids and values on one grid."""

    n_bidders: int
    value_grid: tuple[Fraction, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "value_grid", _grid(self.value_grid))
        if len(self.value_grid) < 2:
            raise GameError("value grid needs at least 2 points")
        if self.n_bidders < 2:
            raise GameError("need at least 2 bidders")
        labels = self.labels
        if labels is None:
            # L/M/H for the classic 3-point grid, v0..vk otherwise
            if len(self.value_grid) == 3:
                labels = ("L", "M", "H")
            else:
                labels = tuple(f"v{i}" for i in range(len(self.value_grid)))
        if len(labels) != len(self.value_grid):
            raise GameError("labels must match the grid length")
        object.__setattr__(self, "labels", tuple(labels))

    def value(self, label: str) -> Fraction:
        return self.value_grid[self.labels.index(label)]


def build_second_price(spec: AuctionSpec) -> Scf:
    """Highest bid wins, pays the highest losing bid; ties uniform at random.

    Types are grid values; quasi-linear utilities (zero for losing, value
    minus price for winning).
    """
    agents = _agent_names(spec.n_bidders)
    type_spaces = {a: spec.labels for a in agents}
    outcome_map = {}
    outcomes = set()
    for profile in itertools.product(*(spec.labels,) * spec.n_bidders):
        bids = [spec.value(t) for t in profile]
        top = max(bids)
        winners = [i for i, b in enumerate(bids) if b == top]
        share = Fraction(1, len(winners))
        weights: dict[str, Fraction] = {}
        for w in winners:
            price = max(b for j, b in enumerate(bids) if j != w)
            oid = f"w={agents[w]};p={price}"
            weights[oid] = weights.get(oid, Fraction(0)) + share
            outcomes.add((oid, agents[w], price))
        outcome_map[profile] = OutcomeLottery(weights)
    values = {
        a: {t: {oid: (spec.value(t) - price if winner == a else Fraction(0))
                for oid, winner, price in outcomes}
            for t in spec.labels}
        for a in agents
    }
    return Scf(agents, type_spaces, outcome_map, UtilityTable(values))


# ---------------------------------------------------------------------------
# top trading cycles

@dataclass(frozen=True)
class ExchangeSpec:
    """Housing market: one endowed object per agent, strict orders over objects."""

    agents: tuple[str, ...]
    endowments: Mapping[str, str]

    def __post_init__(self):
        if len(set(self.endowments[a] for a in self.agents)) != len(self.agents):
            raise GameError("endowments must be distinct, one per agent")

    @property
    def houses(self) -> tuple[str, ...]:
        return tuple(self.endowments[a] for a in self.agents)


def default_exchange_spec(n_agents: int) -> ExchangeSpec:
    agents = _agent_names(n_agents)
    return ExchangeSpec(agents, {a: f"h{a}" for a in agents})


def _order_id(order: Sequence[str]) -> str:
    return ">".join(order)


def _parse_order(type_id: str) -> tuple[str, ...]:
    return tuple(type_id.split(">"))


def top_trading_cycles(spec: ExchangeSpec,
                       orders: Mapping[str, Sequence[str]]) -> dict[str, str]:
    """Run the top-cycle rounds: point at the owner of the favorite remaining
    house, clear every cycle, repeat.  Returns agent -> assigned house."""
    owner = {spec.endowments[a]: a for a in spec.agents}
    active = list(spec.agents)
    assignment: dict[str, str] = {}
    while active:
        remaining = {spec.endowments[a] for a in active}
        points = {}
        for a in active:
            favorite = next(h for h in orders[a] if h in remaining)
            points[a] = owner[favorite]
        # walk from the first active agent until a node repeats: that's a cycle
        trail, seen = [], {}
        node = active[0]
        while node not in seen:
            seen[node] = len(trail)
            trail.append(node)
            node = points[node]
        cycle = trail[seen[node]:]
        for a in cycle:
            assignment[a] = spec.endowments[points[a]]
        active = [a for a in active if a not in cycle]
    return assignment


def build_ttc(spec: ExchangeSpec) -> Scf:
    """Types are strict orders over all houses; assignment via trading cycles."""
    houses = spec.houses
    n = len(houses)
    orders = [tuple(p) for p in itertools.permutations(houses)]
    type_spaces = {a: tuple(_order_id(o) for o in orders) for a in spec.agents}
    outcome_map = {}
    for profile in itertools.product(*(type_spaces[a] for a in spec.agents)):
        reported = {a: _parse_order(t) for a, t in zip(spec.agents, profile)}
        assignment = top_trading_cycles(spec, reported)
        oid = ";".join(f"{a}={assignment[a]}" for a in spec.agents)
        outcome_map[profile] = OutcomeLottery.point(oid)
    all_outcomes = {lot.support[0] for lot in outcome_map.values()}

    def rank_value(order: tuple[str, ...], house: str) -> Fraction:
        return Fraction(n - order.index(house))

    values = {}
    for a in spec.agents:
        values[a] = {}
        for t in type_spaces[a]:
            order = _parse_order(t)
            table = {}
            for oid in all_outcomes:
                assigned = dict(pair.split("=") for pair in oid.split(";"))[a]
                table[oid] = rank_value(order, assigned)
            values[a][t] = table
    return Scf(spec.agents, type_spaces, outcome_map, UtilityTable(values))


# ---------------------------------------------------------------------------
# pivotal (Clarke) mechanism

def build_pivotal(n_agents: int, value_grid: Sequence) -> Scf:
    """Binary public project with equal cost shares folded into net values.

    Types are net valuations on the grid; the project is built iff reported
    net values sum to >= 0; a pivotal agent (one whose report flips the
    decision) pays the absolute harm imposed on the others.
    """
    grid = _grid(value_grid)
    agents = _agent_names(n_agents)
    labels = tuple(str(v) for v in grid)
    value = dict(zip(labels, grid))
    type_spaces = {a: labels for a in agents}
    outcome_map = {}
    outcomes = {}
    for profile in itertools.product(*(labels,) * n_agents):
        reports = [value[t] for t in profile]
        total = sum(reports)
        build = total >= 0
        taxes = []
        for i in range(n_agents):
            rest = total - reports[i]
            pivotal = (rest >= 0) != build
            taxes.append(abs(rest) if pivotal else Fraction(0))
        oid = f"d={1 if build else 0};" + ";".join(
            f"t{a}={tax}" for a, tax in zip(agents, taxes))
        outcomes[oid] = (build, tuple(taxes))
        outcome_map[profile] = OutcomeLottery.point(oid)
    values = {
        a: {t: {oid: (value[t] if build else Fraction(0)) - taxes[i]
                for oid, (build, taxes) in outcomes.items()}
            for t in labels}
        for i, a in enumerate(agents)
    }
    return Scf(agents, type_spaces, outcome_map, UtilityTable(values))


# ---------------------------------------------------------------------------
# student-proposing deferred acceptance

@dataclass(frozen=True)
class SchoolChoiceSpec:
    """School seats with strict priorities; types are strict preference orders.

    `preference_domain` maps each student to her allowed orders (tuples of
    school ids; shorter tuples truncate, unlisted schools meaning the outside
    option is preferred to them).  None means all full-length orders.
    """

    students: tuple[str, ...]
    schools: tuple[str, ...]
    capacities: Mapping[str, int]
    priorities: Mapping[str, tuple[str, ...]]
    preference_domain: Mapping[str, tuple[tuple[str, ...], ...]] | None = None

    def __post_init__(self):
        for s in self.schools:
            if self.capacities[s] < 1:
                raise GameError(f"capacity of {s!r} must be >= 1")
            if tuple(sorted(self.priorities[s])) != tuple(sorted(self.students)):
                raise GameError(f"priority order of {s!r} must rank every student")

    def domain(self, student: str) -> tuple[tuple[str, ...], ...]:
        if self.preference_domain is not None:
            return tuple(tuple(o) for o in self.preference_domain[student])
        return tuple(itertools.permutations(self.schools))


def default_school_spec() -> SchoolChoiceSpec:
    # crossed priorities so rejection chains can reshuffle others' seats
    return SchoolChoiceSpec(
        students=("s1", "s2", "s3"),
        schools=("A", "B", "C"),
        capacities={"A": 1, "B": 1, "C": 1},
        priorities={"A": ("s2", "s1", "s3"),
                    "B": ("s1", "s3", "s2"),
                    "C": ("s1", "s2", "s3")},
    )


def deferred_acceptance(spec: SchoolChoiceSpec,
                        reports: Mapping[str, Sequence[str]]) -> dict[str, "str | None"]:
    """Propose / tentatively hold / reject rounds; returns student -> school."""
    next_choice = {s: 0 for s in spec.students}
    held: dict[str, list[str]] = {sc: [] for sc in spec.schools}
    free = [s for s in spec.students if reports[s]]
    assignment: dict[str, str | None] = {s: None for s in spec.students}
    while free:
        rejected = []
        for s in free:
            prefs = reports[s]
            if next_choice[s] >= len(prefs):
                continue
            held[prefs[next_choice[s]]].append(s)
        for sc in spec.schools:
            rank = spec.priorities[sc].index
            held[sc].sort(key=rank)
            overflow = held[sc][spec.capacities[sc]:]
            held[sc] = held[sc][:spec.capacities[sc]]
            rejected.extend(overflow)
        for s in rejected:
            next_choice[s] += 1
        free = [s for s in rejected if next_choice[s] < len(reports[s])]
    for sc, kept in held.items():
        for s in kept:
            assignment[s] = sc
    return assignment


def build_spda(spec: SchoolChoiceSpec) -> Scf:
    """Types are preference orders; deterministic matching; rank utilities."""
    type_spaces = {s: tuple(_order_id(o) for o in spec.domain(s))
                   for s in spec.students}
    n_schools = len(spec.schools)
    outcome_map = {}
    for profile in itertools.product(*(type_spaces[s] for s in spec.students)):
        reports = {s: _parse_order(t) for s, t in zip(spec.students, profile)}
        match = deferred_acceptance(spec, reports)
        oid = ";".join(f"{s}={match[s] or '~'}" for s in spec.students)
        outcome_map[profile] = OutcomeLottery.point(oid)
    all_outcomes = {lot.support[0] for lot in outcome_map.values()}
    values = {}
    for s in spec.students:
        values[s] = {}
        for t in type_spaces[s]:
            order = _parse_order(t)
            table = {}
            for oid in all_outcomes:
                assigned = dict(pair.split("=") for pair in oid.split(";"))[s]
                if assigned == "~":
                    table[oid] = Fraction(0)
                elif assigned in order:
                    table[oid] = Fraction(n_schools - order.index(assigned))
                else:
                    # only reachable under truncation domains: an unlisted
                    # school is worse than staying unmatched
                    table[oid] = Fraction(-1)
            values[s][t] = table
    return Scf(spec.students, type_spaces, outcome_map, UtilityTable(values))


def is_stable(spec: SchoolChoiceSpec, prefs: Mapping[str, Sequence[str]],
              match: Mapping[str, "str | None"]) -> bool:
    """No blocking pair: no student prefers a school that would admit her."""
    filled: dict[str, list[str]] = {sc: [] for sc in spec.schools}
    for s, sc in match.items():
        if sc is not None:
            filled[sc].append(s)
    for s in spec.students:
        order = prefs[s]
        current = match[s]
        better = order if current is None else order[:order.index(current)] \
            if current in order else order
        for sc in better:
            rank = spec.priorities[sc].index
            if len(filled[sc]) < spec.capacities[sc]:
                return False
            if any(rank(s) < rank(held) for held in filled[sc]):
                return False
    return True


# ---------------------------------------------------------------------------
# uniform rationing rule

def _solve_cap(peaks: list[Fraction], amount: Fraction, demand: bool) -> Fraction:
    """Exact cap so that sum(min(peak, cap)) (demand) or sum(max(peak, cap))
    (supply) equals `amount`."""
    clamp = (lambda p, lam: min(p, lam)) if demand else (lambda p, lam: max(p, lam))
    candidates = sorted(set(peaks)) + [max(peaks) + abs(amount) + 1, Fraction(0)]
    for lo, hi in itertools.combinations(sorted(set(candidates)), 2):
        # on [lo, hi] the filled amount is linear in the cap
        flo = sum(clamp(p, lo) for p in peaks)
        fhi = sum(clamp(p, hi) for p in peaks)
        if flo == amount:
            return lo
        if fhi == amount:
            return hi
        if flo < amount < fhi:
            slope = (fhi - flo) / (hi - lo)
            if slope != 0:
                lam = lo + (amount - flo) / slope
                if sum(clamp(p, lam) for p in peaks) == amount:
                    return lam
    raise AssertionError("no feasible cap; inputs violate builder preconditions")


def build_uniform_rule(n_agents: int, amount, peak_grid: Sequence) -> Scf:
    """Ration `amount` among single-peaked agents: cap demands (or pad
    supplies) at a common level chosen for feasibility."""
    amount = as_fraction(amount)
    grid = _grid(peak_grid)
    agents = _agent_names(n_agents)
    labels = tuple(str(v) for v in grid)
    peak_of = dict(zip(labels, grid))
    type_spaces = {a: labels for a in agents}
    outcome_map = {}
    allocations = {}
    for profile in itertools.product(*(labels,) * n_agents):
        peaks = [peak_of[t] for t in profile]
        total = sum(peaks)
        if total == amount:
            alloc = list(peaks)
        elif total > amount:
            lam = _solve_cap(peaks, amount, demand=True)
            alloc = [min(p, lam) for p in peaks]
        else:
            lam = _solve_cap(peaks, amount, demand=False)
            alloc = [max(p, lam) for p in peaks]
        oid = ";".join(f"{a}={x}" for a, x in zip(agents, alloc))
        allocations[oid] = tuple(alloc)
        outcome_map[profile] = OutcomeLottery.point(oid)
    values = {
        a: {t: {oid: -abs(alloc[i] - peak_of[t])
                for oid, alloc in allocations.items()}
            for t in labels}
        for i, a in enumerate(agents)
    }
    return Scf(agents, type_spaces, outcome_map, UtilityTable(values))


# ---------------------------------------------------------------------------
# median voting

def build_median_voting(n_voters: int, alternative_grid: Sequence) -> Scf:
    """Outcome is the median reported peak; utilities are negative distance."""
    if n_voters % 2 == 0:
        raise GameError("phantom configuration required for an even voter count")
    grid = _grid(alternative_grid)
    agents = _agent_names(n_voters)
    labels = tuple(str(v) for v in grid)
    peak_of = dict(zip(labels, grid))
    type_spaces = {a: labels for a in agents}
    outcome_map = {}
    for profile in itertools.product(*(labels,) * n_voters):
        chosen = sorted(peak_of[t] for t in profile)[n_voters // 2]
        outcome_map[profile] = OutcomeLottery.point(str(chosen))
    values = {
        a: {t: {str(v): -abs(v - peak_of[t]) for v in grid}
            for t in labels}
        for a in agents
    }
    return Scf(agents, type_spaces, outcome_map, UtilityTable(values))


# ---------------------------------------------------------------------------
# indifference dictatorship with an enlarged message space (example 1)

def build_example1(k: int) -> tuple[Scf, Mechanism]:
    """Two agents; agent 2 dictates but one of her types is indifferent.

    Agent 1 has a single type preferring outcome `a`; agent 2 either is
    indifferent between `a` and `b` (type t2) or strictly prefers `b` (t2x).
    The revelation scf gives the indifferent type outcome `a` (efficient
    dictatorship).  The returned enlarged mechanism keeps the b-message and
    clones the a-message k times, which shifts the uniform randomization of
    the indifferent type toward `a`.
    """
    if k < 1:
        raise GameError("k must be >= 1")
    agents = ("1", "2")
    type_spaces = {"1": ("t1",), "2": ("t2", "t2x")}
    outcome_map = {
        ("t1", "t2"): OutcomeLottery.point("a"),
        ("t1", "t2x"): OutcomeLottery.point("b"),
    }
    values = {
        "1": {"t1": {"a": Fraction(1), "b": Fraction(0)}},
        "2": {"t2": {"a": Fraction(1), "b": Fraction(1)},
              "t2x": {"a": Fraction(0), "b": Fraction(1)}},
    }
    scf = Scf(agents, type_spaces, outcome_map, UtilityTable(values))
    messages_2 = ("t2x",) + tuple(f"m{j}" for j in range(1, k + 1))
    outcome_fn = {("t1", "t2x"): OutcomeLottery.point("b")}
    for j in range(1, k + 1):
        outcome_fn[("t1", f"m{j}")] = OutcomeLottery.point("a")
    enlarged = Mechanism(agents=agents,
                         message_spaces={"1": ("t1",), "2": messages_2},
                         outcome_fn=outcome_fn)
    return scf, enlarged


# ---------------------------------------------------------------------------
# two-agent correspondence with no strategy-proof selection (example 5)

class CorrespondenceInstance(NamedTuple):
    mechanism: Mechanism
    utilities: UtilityTable
    type_spaces: dict[str, tuple[str, ...]]
    admissible: dict[tuple[str, str], tuple[str, ...]]


def build_example5(eps) -> CorrespondenceInstance:
    """4x2 mechanism and the admissible-outcome correspondence it implements.

    The correspondence cells at agent 1's first type are full mixture
    simplices over two outcomes, stored by their support; the other cells
    are points.  For small `eps` no strategy-proof selection from the
    correspondence exists, yet the mechanism's equilibria stay inside it.
    """
    eps = as_fraction(eps)
    if not (0 < eps < 1):
        raise GameError("eps must lie strictly between 0 and 1")
    agents = ("1", "2")
    type_spaces = {"1": ("t1", "t1x", "t1y"), "2": ("t2", "t2x")}
    half = Fraction(1, 2)
    u1 = {
        "t1": {"a": 1, "b": -1, "c": half - eps, "d": -1,
               "a'": -1, "b'": 1, "c'": -1, "d'": half - eps},
        "t1x": {"a": 0, "b": 0, "c": 1, "d": 0, "a'": 0, "b'": 0, "c'": 1, "d'": 0},
        "t1y": {"a": 0, "b": 0, "c": 0, "d": 1, "a'": 0, "b'": 0, "c'": 0, "d'": 1},
    }
    u2 = {
        "t2": {"a": eps, "b": 1, "c": 0, "d": 0,
               "a'": 0, "b'": 1 - eps, "c'": -1, "d'": -1},
        "t2x": {"a": 1 - eps, "b": 0, "c": -1, "d": -1,
                "a'": 1, "b'": eps, "c'": 0, "d'": 0},
    }
    utilities = UtilityTable({"1": u1, "2": u2})
    row1 = ("a", "b", "c", "d")
    row2 = ("a'", "b'", "c'", "d'")
    messages_1 = ("m1", "m2", "m3", "m4")
    outcome_fn = {}
    for j, m in enumerate(messages_1):
        outcome_fn[(m, "n1")] = OutcomeLottery.point(row1[j])
        outcome_fn[(m, "n2")] = OutcomeLottery.point(row2[j])
    mechanism = Mechanism(agents=agents,
                          message_spaces={"1": messages_1, "2": ("n1", "n2")},
                          outcome_fn=outcome_fn)
    admissible = {
        ("t1", "t2"): ("a", "b"), ("t1", "t2x"): ("a'", "b'"),
        ("t1x", "t2"): ("c",), ("t1x", "t2x"): ("c'",),
        ("t1y", "t2"): ("d",), ("t1y", "t2x"): ("d'",),
    }
    return CorrespondenceInstance(mechanism, utilities, type_spaces, admissible)


def strategy_proof_selections(instance: CorrespondenceInstance,
                              grid_step=Fraction(1, 64)) -> list[Scf]:
    """Enumerate grid selections from the correspondence, keep strategy-proof ones.

    Simplex cells are discretized with mixtures at multiples of `grid_step`;
    an empty result certifies non-existence over the grid only.
    """
    grid_step = as_fraction(grid_step)
    agents = ("1", "2")
    cells = list(instance.admissible.items())
    choices_per_cell = []
    for _, support in cells:
        if len(support) == 1:
            choices_per_cell.append([OutcomeLottery.point(support[0])])
        else:
            o1, o2 = support
            steps = int(1 / grid_step)
            choices_per_cell.append([
                OutcomeLottery({o1: Fraction(j) * grid_step,
                                o2: 1 - Fraction(j) * grid_step})
                for j in range(steps + 1)])
    found = []
    for combo in itertools.product(*choices_per_cell):
        outcome_map = {profile: lot for (profile, _), lot in zip(cells, combo)}
        candidate = Scf(agents, instance.type_spaces, outcome_map,
                        instance.utilities)
        if is_strategy_proof(candidate).holds:
            found.append(candidate)
    return found


def default_instances() -> dict[str, Scf]:
    """The desk-scale instances used for the sign-table reproduction."""
    return {
        "second-price": build_second_price(
            AuctionSpec(2, (Fraction(0), Fraction(1, 2), Fraction(1)))),
        "ttc": build_ttc(default_exchange_spec(2)),
        "pivotal": build_pivotal(2, (Fraction(-1), Fraction(0), Fraction(1))),
        "spda": build_spda(default_school_spec()),
        "uniform": build_uniform_rule(3, 1, (Fraction(0), Fraction(1, 3),
                                             Fraction(2, 3), Fraction(1))),
        "median": build_median_voting(3, (0, 1, 2, 3, 4)),
    }
