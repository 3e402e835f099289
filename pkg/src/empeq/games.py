"""Finite Bayesian and complete-information games with exact-rational payoffs.

Outcomes of a mechanism are lotteries over a finite outcome set, priors are
common priors over finite payoff-type profiles, and all probabilities and
utilities are `fractions.Fraction` so that equality checks (of welfare, of
outcome lotteries) are exact.  Strategy profiles may carry floats; they are
the only objects for which float tolerances exist.

All values are immutable after construction and all operations are pure
functions, so they are safe to share across workers.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

Rational = Fraction
Prob = "float | Fraction"

# Float-mode tolerances: below solver residuals, above accumulated roundoff.
TOL_U = 1e-9       # payoff comparisons on float profiles
PROB_TOL = 1e-12   # distribution normalization slack for float profiles


class GameError(ValueError):
    """Raised when a game object violates its construction invariants."""


def _check_id(kind: str, s: str) -> str:
    if not isinstance(s, str) or not s:
        raise GameError(f"{kind} id must be a nonempty string, got {s!r}")
    if "," in s:
        # profile keys in the JSON document format are comma-joined
        raise GameError(f"{kind} id may not contain a comma: {s!r}")
    return s


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, and 'p/q' strings to Fraction; reject floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise GameError(f"expected an exact rational, got {type(x).__name__}: {x!r}")


@dataclass(frozen=True)
class OutcomeLottery:
    """Probability distribution over a finite outcome set, exact weights."""

    weights: Mapping[str, Fraction]

    def __post_init__(self):
        cleaned = {}
        for outcome, w in self.weights.items():
            _check_id("outcome", outcome)
            w = as_fraction(w)
            if w < 0:
                raise GameError(f"negative lottery weight for {outcome!r}: {w}")
            if w > 0:
                cleaned[outcome] = w
        if not cleaned:
            raise GameError("lottery support is empty")
        if sum(cleaned.values()) != 1:
            raise GameError(f"lottery weights sum to {sum(cleaned.values())}, not 1")
        object.__setattr__(self, "weights", cleaned)

    @staticmethod
    def point(outcome: str) -> "OutcomeLottery":
        return OutcomeLottery({outcome: Fraction(1)})

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(self.weights)

    def expect(self, util: Mapping[str, Fraction]) -> Fraction:
        """Expected utility of the lottery under a per-outcome utility map."""
        return sum((w * util[o] for o, w in self.weights.items()), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, OutcomeLottery):
            return NotImplemented
        return dict(self.weights) == dict(other.weights)

    def __hash__(self):
        return hash(frozenset(self.weights.items()))


@dataclass(frozen=True)
class UtilityTable:
    """Per agent and payoff type, an exact utility index over outcomes."""

    values: Mapping[str, Mapping[str, Mapping[str, Fraction]]]

    def __post_init__(self):
        frozen = {
            agent: {t: {o: as_fraction(u) for o, u in table.items()}
                    for t, table in by_type.items()}
            for agent, by_type in self.values.items()
        }
        object.__setattr__(self, "values", frozen)

    def utility(self, agent: str, type_id: str, outcome: str) -> Fraction:
        try:
            return self.values[agent][type_id][outcome]
        except KeyError:
            raise GameError(
                f"utility undefined for agent {agent!r}, type {type_id!r}, "
                f"outcome {outcome!r}") from None

    def lottery_value(self, agent: str, type_id: str, lottery: OutcomeLottery) -> Fraction:
        return lottery.expect(self.values[agent][type_id])

    def covers(self, agent: str, type_id: str, outcomes: Iterable[str]) -> bool:
        table = self.values.get(agent, {}).get(type_id)
        return table is not None and all(o in table for o in outcomes)


@dataclass(frozen=True)
class Mechanism:
    """Finite message spaces per agent plus an outcome function into lotteries.

    `outcome_fn` must be total on the cartesian product of the message
    spaces; message profiles are tuples aligned with `agents`.
    """

    agents: tuple[str, ...]
    message_spaces: Mapping[str, tuple[str, ...]]
    outcome_fn: Mapping[tuple[str, ...], OutcomeLottery]

    def __post_init__(self):
        if not self.agents:
            raise GameError("mechanism needs at least one agent")
        for a in self.agents:
            _check_id("agent", a)
            space = self.message_spaces.get(a)
            if not space:
                raise GameError(f"empty message space for agent {a!r}")
            for m in space:
                _check_id("message", m)
        for profile in self.message_profiles():
            if profile not in self.outcome_fn:
                raise GameError(f"outcome function undefined at {profile}")

    def message_profiles(self) -> Iterator[tuple[str, ...]]:
        return itertools.product(*(self.message_spaces[a] for a in self.agents))

    def outcome(self, profile: Sequence[str]) -> OutcomeLottery:
        return self.outcome_fn[tuple(profile)]

    def reachable_outcomes(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for lot in self.outcome_fn.values():
            for o in lot.support:
                seen.setdefault(o)
        return tuple(seen)


@dataclass(frozen=True)
class Prior:
    """Common prior over payoff-type profiles (tuples in agent order)."""

    weights: Mapping[tuple[str, ...], Fraction]

    def __post_init__(self):
        cleaned = {}
        for profile, w in self.weights.items():
            w = as_fraction(w)
            if w < 0:
                raise GameError(f"negative prior weight at {profile}")
            if w > 0:
                cleaned[tuple(profile)] = w
        if not cleaned:
            raise GameError("prior has empty support")
        if sum(cleaned.values()) != 1:
            raise GameError(f"prior weights sum to {sum(cleaned.values())}, not 1")
        object.__setattr__(self, "weights", cleaned)

    @staticmethod
    def degenerate(profile: Sequence[str]) -> "Prior":
        return Prior({tuple(profile): Fraction(1)})

    @staticmethod
    def uniform(profiles: Iterable[Sequence[str]]) -> "Prior":
        profiles = [tuple(p) for p in profiles]
        w = Fraction(1, len(profiles))
        return Prior({p: w for p in profiles})

    @property
    def support(self) -> tuple[tuple[str, ...], ...]:
        return tuple(self.weights)

    @property
    def is_degenerate(self) -> bool:
        return len(self.weights) == 1

    def full_support_over(self, type_spaces: Sequence[Sequence[str]]) -> bool:
        universe = itertools.product(*type_spaces)
        return all(tuple(p) in self.weights for p in universe)

    def marginal(self, index: int) -> dict[str, Fraction]:
        out: dict[str, Fraction] = {}
        for profile, w in self.weights.items():
            out[profile[index]] = out.get(profile[index], Fraction(0)) + w
        return out

    def conditional(self, index: int, type_id: str) -> dict[tuple[str, ...], Fraction]:
        """p(opponent profile | own type), keyed by the profile minus `index`."""
        rows = {p: w for p, w in self.weights.items() if p[index] == type_id}
        total = sum(rows.values(), Fraction(0))
        if total == 0:
            raise GameError("type outside prior support")
        return {p[:index] + p[index + 1:]: w / total for p, w in rows.items()}


@dataclass(frozen=True)
class BayesianGame:
    """A finite mechanism bundled with a common prior and utilities."""

    mechanism: Mechanism
    prior: Prior
    utilities: UtilityTable
    type_spaces: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        spaces = [self.type_spaces.get(a) for a in self.agents]
        if any(not s for s in spaces):
            raise GameError("every agent needs a nonempty type space")
        for profile in self.prior.support:
            if len(profile) != len(self.agents):
                raise GameError(f"prior profile {profile} has wrong arity")
            for a, t in zip(self.agents, profile):
                if t not in self.type_spaces[a]:
                    raise GameError(f"prior type {t!r} not in {a!r}'s type space")
        reachable = self.mechanism.reachable_outcomes()
        for i, a in enumerate(self.agents):
            for t in self.supported_types(a):
                if not self.utilities.covers(a, t, reachable):
                    raise GameError(
                        f"utilities for agent {a!r} type {t!r} do not cover all "
                        "reachable outcomes")

    @property
    def agents(self) -> tuple[str, ...]:
        return self.mechanism.agents

    def agent_index(self, agent: str) -> int:
        return self.agents.index(agent)

    def supported_types(self, agent: str) -> tuple[str, ...]:
        marg = self.prior.marginal(self.agent_index(agent))
        return tuple(t for t in self.type_spaces[agent] if marg.get(t, 0) > 0)

    def payoff(self, agent: str, type_id: str, message_profile: Sequence[str]) -> Fraction:
        lot = self.mechanism.outcome(message_profile)
        return self.utilities.lottery_value(agent, type_id, lot)


@dataclass
class StrategyProfile:
    """Per supported agent-type, a distribution over that agent's messages.

    Distributions may be exact (all Fractions) or floats; `is_exact` tells
    which.  Keys are (agent, type) pairs.
    """

    dists: dict[tuple[str, str], dict[str, "float | Fraction"]]

    @staticmethod
    def uniform(game: BayesianGame) -> "StrategyProfile":
        dists = {}
        for a in game.agents:
            space = game.mechanism.message_spaces[a]
            w = Fraction(1, len(space))
            for t in game.supported_types(a):
                dists[(a, t)] = {m: w for m in space}
        return StrategyProfile(dists)

    @staticmethod
    def pure(game: BayesianGame, choice: Mapping[tuple[str, str], str]) -> "StrategyProfile":
        dists = {}
        for a in game.agents:
            for t in game.supported_types(a):
                m = choice[(a, t)]
                dists[(a, t)] = {r: Fraction(1 if r == m else 0)
                                 for r in game.mechanism.message_spaces[a]}
        return StrategyProfile(dists)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, (Fraction, int))
                   for d in self.dists.values() for p in d.values())

    def dist(self, agent: str, type_id: str) -> dict[str, "float | Fraction"]:
        return self.dists[(agent, type_id)]

    def support(self, agent: str, type_id: str, atol: float = 0.0) -> tuple[str, ...]:
        d = self.dists[(agent, type_id)]
        return tuple(m for m, p in d.items() if p > atol)


@dataclass(frozen=True)
class ProfileViolation:
    kind: str            # "normalization" | "negative" | "coverage" | "unknown-message"
    agent: str
    type_id: str
    detail: str


def validate_profile(game: BayesianGame, profile: StrategyProfile) -> list[ProfileViolation]:
    """List the ways a profile fails to be a valid behavior strategy profile."""
    out = []
    for a in game.agents:
        space = set(game.mechanism.message_spaces[a])
        for t in game.supported_types(a):
            d = profile.dists.get((a, t))
            if d is None:
                out.append(ProfileViolation("coverage", a, t,
                                            "no distribution for supported type"))
                continue
            bad = [m for m in d if m not in space]
            if bad:
                out.append(ProfileViolation("unknown-message", a, t,
                                            f"messages outside space: {bad}"))
            if any(p < 0 for p in d.values()):
                out.append(ProfileViolation("negative", a, t, "negative probability"))
            total = sum(d.values())
            exact = all(isinstance(p, (Fraction, int)) for p in d.values())
            ok = (total == 1) if exact else abs(total - 1.0) <= PROB_TOL
            if not ok:
                out.append(ProfileViolation("normalization", a, t,
                                            f"probabilities sum to {total}"))
    return out


def expected_utility(game: BayesianGame, profile: StrategyProfile, agent: str,
                     type_id: str, action_dist: Mapping[str, "float | Fraction"]):
    """Interim expected utility of playing `action_dist` against `profile`.

    Sums over opponent types in the prior's conditional support and over all
    message profiles; exact when every input probability is rational.
    """
    i = game.agent_index(agent)
    opponents = [a for a in game.agents if a != agent]
    cond = game.prior.conditional(i, type_id)  # raises if type unsupported
    total = Fraction(0)
    for opp_types, pw in cond.items():
        opp_dists = [profile.dists[(a, t)] for a, t in zip(opponents, opp_types)]
        for own_m, own_p in action_dist.items():
            if own_p == 0:
                continue
            for opp_ms in itertools.product(*(d.keys() for d in opp_dists)):
                w = own_p
                for d, m in zip(opp_dists, opp_ms):
                    w = w * d[m]
                if w == 0:
                    continue
                full = opp_ms[:i] + (own_m,) + opp_ms[i:]
                total = total + w * pw * game.payoff(agent, type_id, full)
    return total


def delta(message: str, space: Sequence[str]) -> dict[str, Fraction]:
    """Point distribution on `message` over a message space."""
    return {m: Fraction(1 if m == message else 0) for m in space}


def to_complete_info(game: BayesianGame, type_profile: Sequence[str]) -> BayesianGame:
    """Restrict the game to a degenerate prior at one type profile."""
    type_profile = tuple(type_profile)
    for a, t in zip(game.agents, type_profile):
        if t not in game.type_spaces[a]:
            raise GameError(f"type {t!r} not in {a!r}'s type space")
    return BayesianGame(mechanism=game.mechanism,
                        prior=Prior.degenerate(type_profile),
                        utilities=game.utilities,
                        type_spaces=game.type_spaces)


def weakly_dominant_messages(mechanism: Mechanism, utilities: UtilityTable,
                             agent: str, type_id: str) -> tuple[str, ...]:
    """Exact enumeration of the agent-type's weakly dominant messages."""
    i = mechanism.agents.index(agent)
    own_space = mechanism.message_spaces[agent]
    others = [mechanism.message_spaces[a] for a in mechanism.agents if a != agent]

    def value(own: str, rest: tuple[str, ...]) -> Fraction:
        full = rest[:i] + (own,) + rest[i:]
        return utilities.lottery_value(agent, type_id, mechanism.outcome(full))

    dominant = []
    for m in own_space:
        ok = True
        for rest in itertools.product(*others):
            vm = value(m, rest)
            if any(value(r, rest) > vm for r in own_space):
                ok = False
                break
        if ok:
            dominant.append(m)
    return tuple(dominant)


def is_strictly_dominant(mechanism: Mechanism, utilities: UtilityTable,
                         agent: str, type_id: str, message: str) -> bool:
    """True iff `message` beats every other message at every opponent profile."""
    i = mechanism.agents.index(agent)
    own_space = mechanism.message_spaces[agent]
    others = [mechanism.message_spaces[a] for a in mechanism.agents if a != agent]
    for rest in itertools.product(*others):
        full = rest[:i] + (message,) + rest[i:]
        vm = utilities.lottery_value(agent, type_id, mechanism.outcome(full))
        for r in own_space:
            if r == message:
                continue
            alt = rest[:i] + (r,) + rest[i:]
            if utilities.lottery_value(agent, type_id, mechanism.outcome(alt)) >= vm:
                return False
    return True


def is_best_response(game: BayesianGame, profile: StrategyProfile, agent: str,
                     type_id: str, message: str, tol: float = TOL_U) -> bool:
    """True iff no alternative message improves on `message` by more than tol.

    Exact (tol ignored) when the profile is rational-tagged.
    """
    space = game.mechanism.message_spaces[agent]
    um = expected_utility(game, profile, agent, type_id, delta(message, space))
    slack = 0 if profile.is_exact else tol
    for r in space:
        if r == message:
            continue
        ur = expected_utility(game, profile, agent, type_id, delta(r, space))
        if ur > um + slack:
            return False
    return True


def iterated_dominance_survivors(
        mechanism: Mechanism, utilities: UtilityTable,
        type_spaces: Mapping[str, Sequence[str]]) -> dict[tuple[str, str], tuple[str, ...]]:
    """Messages surviving iterated elimination of weakly dominated messages.

    Elimination is interim: a message for an agent-type is removed when some
    other surviving message of that type weakly dominates it against every
    profile of opponent messages that survive for *some* opponent type.
    Removal is simultaneous and maximal each round.
    """
    surv = {(a, t): tuple(mechanism.message_spaces[a])
            for a in mechanism.agents for t in type_spaces[a]}
    while True:
        pool = {a: tuple(dict.fromkeys(m for t in type_spaces[a] for m in surv[(a, t)]))
                for a in mechanism.agents}
        removals: dict[tuple[str, str], set[str]] = {}
        for a in mechanism.agents:
            i = mechanism.agents.index(a)
            opp_pools = [pool[b] for b in mechanism.agents if b != a]
            opp_profiles = list(itertools.product(*opp_pools))
            for t in type_spaces[a]:
                vals = {}
                for m in surv[(a, t)]:
                    vals[m] = [utilities.lottery_value(
                        a, t, mechanism.outcome(rest[:i] + (m,) + rest[i:]))
                        for rest in opp_profiles]
                dropped = set()
                for m in surv[(a, t)]:
                    for r in surv[(a, t)]:
                        if r == m:
                            continue
                        diffs = [vr - vm for vr, vm in zip(vals[r], vals[m])]
                        if all(d >= 0 for d in diffs) and any(d > 0 for d in diffs):
                            dropped.add(m)
                            break
                if dropped and dropped != set(surv[(a, t)]):
                    removals[(a, t)] = dropped
        if not removals:
            return surv
        for key, dropped in removals.items():
            surv[key] = tuple(m for m in surv[key] if m not in dropped)
