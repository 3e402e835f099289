"""Social choice functions on finite payoff-type spaces and exact checkers.

An scf maps type profiles to outcome lotteries (lottery-valued so uniform
tie-breaking is representable).  The four property checkers are exhaustive
enumerations over the finite type space with exact-rational comparisons:

* strategy-proofness: no unilateral misreport ever raises the liar's welfare;
* non-bossiness in welfare-outcome: a misreport that leaves the liar's
  welfare unchanged leaves the outcome unchanged;
* essentially unique dominant strategies: a welfare-neutral, outcome-changing
  misreport is strictly punished at some opponent report profile;
* outcome rectangularity: whenever every agent's unilateral switch between
  two profiles leaves the outcome at the second profile, the two profiles
  share an outcome.

Outcome equality means exact equality of lottery distributions; welfare
equality means exact equality of expected utilities.  Witnesses re-check
against the definition they violate, in declared iteration order, so runs
are deterministic and the first witness found is reported.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .games import (BayesianGame, GameError, Mechanism, OutcomeLottery, Prior,
                    UtilityTable)


@dataclass(frozen=True)
class Scf:
    """Map from payoff-type profiles to outcome lotteries, with utilities."""

    agents: tuple[str, ...]
    type_spaces: Mapping[str, tuple[str, ...]]
    outcome_map: Mapping[tuple[str, ...], OutcomeLottery]
    utilities: UtilityTable

    def __post_init__(self):
        for profile in self.type_profiles():
            if profile not in self.outcome_map:
                raise GameError(f"outcome map undefined at {profile}")
        for profile, lot in self.outcome_map.items():
            for i, a in enumerate(self.agents):
                if not self.utilities.covers(a, profile[i], lot.support):
                    raise GameError(
                        f"utilities for {a!r} type {profile[i]!r} miss outcomes "
                        f"of {lot.support}")

    def type_profiles(self) -> Iterator[tuple[str, ...]]:
        return itertools.product(*(self.type_spaces[a] for a in self.agents))

    def outcome(self, profile: Sequence[str]) -> OutcomeLottery:
        return self.outcome_map[tuple(profile)]

    def welfare(self, agent: str, type_id: str, profile: Sequence[str]) -> Fraction:
        """Expected utility for the agent-type of the outcome at `profile`."""
        return self.utilities.lottery_value(agent, type_id, self.outcome(profile))

    def replace(self, profile: Sequence[str], index: int, type_id: str) -> tuple[str, ...]:
        p = tuple(profile)
        return p[:index] + (type_id,) + p[index + 1:]

    def restrict(self, sub_spaces: Mapping[str, Sequence[str]]) -> "Scf":
        """Sub-box restriction: same outcomes and utilities on smaller spaces."""
        spaces = {a: tuple(sub_spaces[a]) for a in self.agents}
        for a in self.agents:
            if not spaces[a] or any(t not in self.type_spaces[a] for t in spaces[a]):
                raise GameError(f"invalid sub-space for {a!r}")
        sub_map = {p: self.outcome_map[p]
                   for p in itertools.product(*(spaces[a] for a in self.agents))}
        return Scf(self.agents, spaces, sub_map, self.utilities)


@dataclass(frozen=True)
class CheckResult:
    """Verdict plus a concrete witness when the property fails."""

    holds: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class PropertyReport:
    strategy_proof: CheckResult
    non_bossy_welfare_outcome: CheckResult
    essentially_unique_dominant: CheckResult
    outcome_rectangular: CheckResult

    def signs(self) -> tuple[str, str, str, str]:
        """(SP, EUDS, NBWO, ORP) as '+'/'-' marks."""
        mark = lambda r: "+" if r.holds else "-"
        return (mark(self.strategy_proof), mark(self.essentially_unique_dominant),
                mark(self.non_bossy_welfare_outcome), mark(self.outcome_rectangular))


def _misreports(scf: Scf) -> Iterator[tuple[tuple[str, ...], int, str, str]]:
    """All (profile, agent index, agent id, alternative report) with alt != truth."""
    for profile in scf.type_profiles():
        for i, a in enumerate(scf.agents):
            for alt in scf.type_spaces[a]:
                if alt != profile[i]:
                    yield profile, i, a, alt


def is_strategy_proof(scf: Scf) -> CheckResult:
    """Brute force: truth is a weakly dominant report for every agent-type.

    Witness on failure: (profile, agent, misreport) where the misreport
    strictly raises the agent's welfare.
    """
    for profile, i, a, alt in _misreports(scf):
        truthful = scf.welfare(a, profile[i], profile)
        lied = scf.welfare(a, profile[i], scf.replace(profile, i, alt))
        if lied > truthful:
            return CheckResult(False, (profile, a, alt))
    return CheckResult(True)


def is_non_bossy_welfare_outcome(scf: Scf) -> CheckResult:
    """Brute force: equal-welfare misreports never change the outcome.

    Witness on failure: (profile, agent, misreport) with equal welfare and
    distinct outcome lotteries.
    """
    for profile, i, a, alt in _misreports(scf):
        lied_profile = scf.replace(profile, i, alt)
        if scf.welfare(a, profile[i], profile) == scf.welfare(a, profile[i], lied_profile):
            if scf.outcome(profile) != scf.outcome(lied_profile):
                return CheckResult(False, (profile, a, alt))
    return CheckResult(True)


def has_essentially_unique_dominant_strategies(scf: Scf) -> CheckResult:
    """Every welfare-neutral outcome-changing misreport is strictly punished.

    For each (profile, agent, misreport) with equal welfare and distinct
    outcome, searches all opponent report profiles for one at which truth is
    strictly better than the misreport.  Witness on failure: the triple
    lacking any punishing opponent profile.
    """
    for profile, i, a, alt in _misreports(scf):
        lied_profile = scf.replace(profile, i, alt)
        if scf.welfare(a, profile[i], profile) != scf.welfare(a, profile[i], lied_profile):
            continue
        if scf.outcome(profile) == scf.outcome(lied_profile):
            continue
        others = [scf.type_spaces[b] for b in scf.agents if b != a]
        punished = False
        for rest in itertools.product(*others):
            with_truth = rest[:i] + (profile[i],) + rest[i:]
            with_lie = rest[:i] + (alt,) + rest[i:]
            if scf.welfare(a, profile[i], with_truth) > scf.welfare(a, profile[i], with_lie):
                punished = True
                break
        if not punished:
            return CheckResult(False, (profile, a, alt))
    return CheckResult(True)


def satisfies_outcome_rectangular(scf: Scf) -> CheckResult:
    """Brute force over unordered profile pairs; witness is a violating pair."""
    profiles = list(scf.type_profiles())
    for pa, pb in itertools.combinations(profiles, 2):
        target = scf.outcome(pb)
        if all(scf.outcome(scf.replace(pb, i, pa[i])) == target
               for i in range(len(scf.agents))):
            if scf.outcome(pa) != target:
                return CheckResult(False, (pa, pb))
        # the condition is not symmetric in the pair; check the other direction
        target = scf.outcome(pa)
        if all(scf.outcome(scf.replace(pa, i, pb[i])) == target
               for i in range(len(scf.agents))):
            if scf.outcome(pb) != target:
                return CheckResult(False, (pb, pa))
    return CheckResult(True)


def classify(scf: Scf) -> PropertyReport:
    """Run all four checkers."""
    return PropertyReport(
        strategy_proof=is_strategy_proof(scf),
        non_bossy_welfare_outcome=is_non_bossy_welfare_outcome(scf),
        essentially_unique_dominant=has_essentially_unique_dominant_strategies(scf),
        outcome_rectangular=satisfies_outcome_rectangular(scf),
    )


def direct_revelation_game(scf: Scf, prior: Prior) -> BayesianGame:
    """Game where message spaces equal type spaces and outcomes come from the scf."""
    mech = Mechanism(agents=scf.agents,
                     message_spaces=dict(scf.type_spaces),
                     outcome_fn=dict(scf.outcome_map))
    return BayesianGame(mechanism=mech, prior=prior, utilities=scf.utilities,
                        type_spaces=dict(scf.type_spaces))
