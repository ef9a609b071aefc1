"""Executable security games.

Seven games are implemented: two-arm distinguishing (plain, with an
encryption oracle, and with a pre-challenge decryption oracle), the
hidden-bit variant, and three flavors of semantic security (distinguisher
with a target register, classical-target comparison, transcript-function
comparison).

Every game runs in one of two modes.  Sampling mode draws keys, coins and
roles' randomness per trial and reports Wilson intervals.  Enumeration
("exact") mode multiplies out the declared coin spaces - key space x
encryption coins x role cases - and reports Fraction-exact probabilities;
it requires deterministic, oracle-free roles.

Individual trials are independent: each owns its stream, oracle handles
and role state, and aggregation is a pure fold over outcomes, so callers
may fan trials out concurrently.  Enumeration is single-threaded per
game, but separate games can run side by side.

Scope note: semantic security quantifies over all adversaries and
simulators; a finite harness can only check named tuples of roles plus
the simulators the reductions construct.  Results here are statements
about those tuples, never about the quantifier.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .errors import EnumerationCapError, OraclePolicyError, RoleError
from .estimate import ENUM_CAP_DEFAULT, AdvantageEstimate, GameArm, estimate
from .quantum import (
    DensityMatrix,
    apply_pauli,
    measurement_distribution,
    partial_trace,
    replace_with_zero_state,
    tensor,
    trace_distance,
)
from .rng import Stream
from .roles import (
    DENIED_ORACLES,
    Channel,
    Distinguisher,
    MessageCase,
    MessageGenerator,
    RoleContext,
    sample_case,
)
from .schemes import Ciphertext, KeyPair, PauliTagScheme

PRE_CHALLENGE = "pre"
POST_CHALLENGE = "post"


# ---------------------------------------------------------------------------
# Oracle policy and handles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OraclePolicy:
    """Phase-scoped oracle grants.

    `pre` applies to the message generator (before the challenge), `post`
    to the adversary, simulator and distinguisher.  A decryption grant
    after the challenge is rejected outright: pre-challenge decryption
    access is the ceiling implemented here.
    """

    name: str
    pre: frozenset
    post: frozenset

    def __post_init__(self):
        allowed = {"enc", "dec"}
        if not set(self.pre) <= allowed or not set(self.post) <= allowed:
            raise OraclePolicyError(f"grants must be within {allowed}")
        if "dec" in self.post:
            raise OraclePolicyError("decryption oracles are never granted post-challenge")

    @classmethod
    def plain(cls) -> "OraclePolicy":
        return cls("plain", frozenset(), frozenset())

    @classmethod
    def cpa(cls) -> "OraclePolicy":
        return cls("cpa", frozenset({"enc"}), frozenset({"enc"}))

    @classmethod
    def cca1(cls) -> "OraclePolicy":
        return cls("cca1", frozenset({"enc", "dec"}), frozenset({"enc"}))


POLICIES = {
    "plain": OraclePolicy.plain,
    "cpa": OraclePolicy.cpa,
    "cca1": OraclePolicy.cca1,
}


class Oracles:
    """Budgeted encryption/decryption handles for one role in one phase."""

    def __init__(self, scheme: PauliTagScheme, keypair: KeyPair, grants: frozenset,
                 rng: Stream, budget: int):
        self._scheme = scheme
        self._keypair = keypair
        self.grants = frozenset(grants)
        self._rng = rng
        self._budget = budget
        self._calls = 0

    def _tick(self, kind: str):
        if kind not in self.grants:
            raise OraclePolicyError(f"{kind!r} oracle not granted under this policy")
        self._calls += 1
        if self._calls > self._budget:
            raise OraclePolicyError(f"oracle budget of {self._budget} calls exhausted")

    def encrypt(self, rho: DensityMatrix) -> Ciphertext:
        self._tick("enc")
        return self._scheme.encrypt(
            self._keypair.ek, rho, self._rng.child(f"enc{self._calls}")
        )

    def decrypt(self, ct: Ciphertext) -> DensityMatrix:
        self._tick("dec")
        return self._scheme.decrypt(self._keypair.dk, ct)


# ---------------------------------------------------------------------------
# Game configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GameConfig:
    n: int = 1
    qubits: int = 1
    trials: int = 1000
    seed: int = 0
    exact: bool = False
    enum_cap: int = ENUM_CAP_DEFAULT
    oracle_budget: int = 64

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.exact and self.qubits > 3:
            raise ValueError("exact mode supports at most 3 plaintext qubits")

    def stream(self, label: str) -> Stream:
        return Stream(self.seed).child(label)


# ---------------------------------------------------------------------------
# Shared engine pieces
# ---------------------------------------------------------------------------


def _pk_for(scheme: PauliTagScheme, keypair: KeyPair):
    return keypair.ek if scheme.flavor == "public" else None


def _check_message(scheme: PauliTagScheme, case: MessageCase) -> None:
    reg = case.state.register("M")
    if reg.qubits != scheme.qubits:
        raise RoleError(
            f"message register holds {reg.qubits} qubits, scheme expects {scheme.qubits}"
        )


def _exact_keypairs(scheme: PauliTagScheme, config: GameConfig):
    """Key branches for enumeration mode; falls back to one drawn keypair."""
    cases = scheme.key_cases()
    if cases is not None:
        return cases
    kp = scheme.keygen(config.stream("fixed-key"))
    return [(Fraction(1), kp)]


def _exact_enc_cases(scheme: PauliTagScheme, ek):
    cases = scheme.encrypt_cases(ek)
    if cases is None:
        raise EnumerationCapError(
            f"scheme {scheme.name!r} does not enumerate its encryption coins"
        )
    return cases


def _exact_ctx(scheme: PauliTagScheme, pk) -> RoleContext:
    return RoleContext(pk=pk, oracles=DENIED_ORACLES, rng=None, exact=True, scheme=scheme)


def _sampling_ctx(scheme, keypair, policy_grants, rng, config, label) -> RoleContext:
    oracles = Oracles(scheme, keypair, policy_grants, rng.child(f"{label}-oracle"),
                      config.oracle_budget)
    return RoleContext(
        pk=_pk_for(scheme, keypair),
        oracles=oracles,
        rng=rng.child(f"{label}-coins"),
        exact=False,
        scheme=scheme,
    )


def _pad_message(state: DensityMatrix, case_pad: Optional[str]) -> DensityMatrix:
    return apply_pauli(case_pad, state, "M") if case_pad is not None else state


def _as_prob(value, exact: bool):
    if exact:
        if not isinstance(value, Fraction):
            raise EnumerationCapError(
                f"role returned a non-exact probability {value!r} in exact mode"
            )
        return value
    return float(value)


# ---------------------------------------------------------------------------
# Indistinguishability games
# ---------------------------------------------------------------------------


def _ind_arm(scheme, mgen, dist, policy, config, zero_arm: bool) -> GameArm:
    def branches():
        for wk, keypair in _exact_keypairs(scheme, config):
            pk = _pk_for(scheme, keypair)
            ctx = _exact_ctx(scheme, pk)
            for mcase in mgen.cases(pk, ctx):
                _check_message(scheme, mcase)
                state = mcase.state
                if zero_arm:
                    state = replace_with_zero_state(state, "M")
                for ecase in _exact_enc_cases(scheme, keypair.ek):
                    padded = _pad_message(state, ecase.pad)
                    p = _as_prob(dist.prob_one(ecase.tag, padded, ctx), True)
                    yield (wk * mcase.weight * ecase.weight, p)

    def sample_probability(rng: Stream) -> float:
        keypair = scheme.keygen(rng.child("key"))
        ctx_pre = _sampling_ctx(scheme, keypair, policy.pre, rng, config, "mgen")
        mcase = sample_case(mgen.cases(ctx_pre.pk, ctx_pre), rng.child("mpick"))
        _check_message(scheme, mcase)
        state = mcase.state
        if zero_arm:
            state = replace_with_zero_state(state, "M")
        ecase = scheme.sample_encryption(keypair.ek, rng.child("enc"))
        padded = _pad_message(state, ecase.pad)
        ctx_post = _sampling_ctx(scheme, keypair, policy.post, rng, config, "dist")
        return float(dist.prob_one(ecase.tag, padded, ctx_post))

    return GameArm(branches=branches, sample_probability=sample_probability)


def run_ind(scheme, mgen, dist, policy: Optional[OraclePolicy] = None,
            config: Optional[GameConfig] = None) -> AdvantageEstimate:
    """Two-arm distinguishing: genuine message versus zeroed message."""
    policy = policy or OraclePolicy.plain()
    config = config or GameConfig()
    real = _ind_arm(scheme, mgen, dist, policy, config, zero_arm=False)
    ideal = _ind_arm(scheme, mgen, dist, policy, config, zero_arm=True)
    return estimate(
        real, ideal,
        exact=config.exact, trials=config.trials,
        rng=config.stream("ind"), cap=config.enum_cap,
    )


def run_ind_prime(scheme, mgen, dist, policy: Optional[OraclePolicy] = None,
                  config: Optional[GameConfig] = None) -> AdvantageEstimate:
    """Hidden-bit variant: report the probability of guessing the bit.

    The returned estimate carries Pr[guess = b] in `p_real`, the guessing
    baseline 1/2 in `p_ideal`, and their distance as the advantage.
    """
    policy = policy or OraclePolicy.plain()
    config = config or GameConfig()

    def branches():
        for wk, keypair in _exact_keypairs(scheme, config):
            pk = _pk_for(scheme, keypair)
            ctx = _exact_ctx(scheme, pk)
            for mcase in mgen.cases(pk, ctx):
                _check_message(scheme, mcase)
                for hidden_bit in (1, 0):
                    state = mcase.state if hidden_bit == 1 else replace_with_zero_state(
                        mcase.state, "M"
                    )
                    for ecase in _exact_enc_cases(scheme, keypair.ek):
                        padded = _pad_message(state, ecase.pad)
                        p1 = _as_prob(dist.prob_one(ecase.tag, padded, ctx), True)
                        success = p1 if hidden_bit == 1 else 1 - p1
                        yield (
                            wk * mcase.weight * ecase.weight * Fraction(1, 2),
                            success,
                        )

    def sample_probability(rng: Stream) -> float:
        keypair = scheme.keygen(rng.child("key"))
        ctx_pre = _sampling_ctx(scheme, keypair, policy.pre, rng, config, "mgen")
        mcase = sample_case(mgen.cases(ctx_pre.pk, ctx_pre), rng.child("mpick"))
        _check_message(scheme, mcase)
        hidden_bit = 1 if rng.child("bit").bernoulli(0.5) else 0
        state = mcase.state if hidden_bit == 1 else replace_with_zero_state(mcase.state, "M")
        ecase = scheme.sample_encryption(keypair.ek, rng.child("enc"))
        padded = _pad_message(state, ecase.pad)
        ctx_post = _sampling_ctx(scheme, keypair, policy.post, rng, config, "dist")
        p1 = float(dist.prob_one(ecase.tag, padded, ctx_post))
        return p1 if hidden_bit == 1 else 1.0 - p1

    arm = GameArm(branches=branches, sample_probability=sample_probability)
    return estimate(
        arm, None,
        exact=config.exact, trials=config.trials,
        rng=config.stream("ind-prime"), cap=config.enum_cap,
    )


def ind_prime_ind_identity_check(scheme, mgen, dist, config: Optional[GameConfig] = None,
                                 policy: Optional[OraclePolicy] = None) -> dict:
    """Check the exact algebra tying the hidden-bit game to the two-arm game.

    For a {0,1}-valued distinguisher D and its negation, enumeration mode
    must satisfy, identically:

        Pr[guess = b] - 1/2       = (Pr[D(real) = 1] - Pr[D(zero) = 1]) / 2
        Pr[flipped guess = b] - 1/2 = -(the same quantity)

    Both sides are computed by their own game, not rearranged from one
    another.  Returns the four quantities and exact-equality flags.
    """
    from .roles import NegatedDistinguisher

    config = replace(config or GameConfig(), exact=True)
    policy = policy or OraclePolicy.plain()

    ind = run_ind(scheme, mgen, dist, policy, config)
    guess = run_ind_prime(scheme, mgen, dist, policy, config)
    guess_flipped = run_ind_prime(scheme, mgen, NegatedDistinguisher(dist), policy, config)

    signed_half = (ind.p_real_exact - ind.p_ideal_exact) / 2
    lhs = guess.p_real_exact - Fraction(1, 2)
    lhs_flipped = guess_flipped.p_real_exact - Fraction(1, 2)
    return {
        "guess_minus_half": float(lhs),
        "half_signed_ind": float(signed_half),
        "flipped_guess_minus_half": float(lhs_flipped),
        "identity_holds": lhs == signed_half,
        "flipped_identity_holds": lhs_flipped == -signed_half,
        "max_residual": float(max(abs(lhs - signed_half), abs(lhs_flipped + signed_half))),
    }


# ---------------------------------------------------------------------------
# Semantic-security games
# ---------------------------------------------------------------------------


def _expand_channel(channel: Channel, ctx: RoleContext, exact: bool):
    if exact:
        return channel.cases(ctx)
    return [(Fraction(1), channel)]


def _sem_real_arm(scheme, mgen, adversary, success_fn, policy, config) -> GameArm:
    """success_fn(out_state, mcase, ctx) -> probability of the real arm's event."""

    def branches():
        for wk, keypair in _exact_keypairs(scheme, config):
            pk = _pk_for(scheme, keypair)
            ctx = _exact_ctx(scheme, pk)
            for mcase in mgen.cases(pk, ctx):
                _check_message(scheme, mcase)
                for ecase in _exact_enc_cases(scheme, keypair.ek):
                    padded = _pad_message(mcase.state, ecase.pad)
                    for wa, adv in _expand_channel(adversary, ctx, True):
                        out = adv.transform(ecase.tag, padded, ctx)
                        p = _as_prob(success_fn(out, mcase, ctx), True)
                        yield (wk * mcase.weight * ecase.weight * wa, p)

    def sample_probability(rng: Stream) -> float:
        keypair = scheme.keygen(rng.child("key"))
        ctx_pre = _sampling_ctx(scheme, keypair, policy.pre, rng, config, "mgen")
        mcase = sample_case(mgen.cases(ctx_pre.pk, ctx_pre), rng.child("mpick"))
        _check_message(scheme, mcase)
        ecase = scheme.sample_encryption(keypair.ek, rng.child("enc"))
        padded = _pad_message(mcase.state, ecase.pad)
        ctx_post = _sampling_ctx(scheme, keypair, policy.post, rng, config, "adv")
        out = adversary.transform(ecase.tag, padded, ctx_post)
        return float(success_fn(out, mcase, ctx_post))

    return GameArm(branches=branches, sample_probability=sample_probability)


def _sem_ideal_arm(scheme, mgen, simulator, success_fn, drop, policy, config) -> GameArm:
    """Ideal arm: the simulator sees the message case with `drop` traced out."""

    def branches():
        for wk, keypair in _exact_keypairs(scheme, config):
            pk = _pk_for(scheme, keypair)
            ctx = _exact_ctx(scheme, pk)
            for mcase in mgen.cases(pk, ctx):
                _check_message(scheme, mcase)
                visible = partial_trace(mcase.state, [r for r in drop if mcase.state.has_register(r)])
                for ws, sim in _expand_channel(simulator, ctx, True):
                    out = sim.transform(None, visible, ctx)
                    p = _as_prob(success_fn(out, mcase, ctx), True)
                    yield (wk * mcase.weight * ws, p)

    def sample_probability(rng: Stream) -> float:
        keypair = scheme.keygen(rng.child("key"))
        ctx_pre = _sampling_ctx(scheme, keypair, policy.pre, rng, config, "mgen")
        mcase = sample_case(mgen.cases(ctx_pre.pk, ctx_pre), rng.child("mpick"))
        _check_message(scheme, mcase)
        visible = partial_trace(
            mcase.state, [r for r in drop if mcase.state.has_register(r)]
        )
        ctx_post = _sampling_ctx(scheme, keypair, policy.post, rng, config, "sim")
        out = simulator.transform(None, visible, ctx_post)
        return float(success_fn(out, mcase, ctx_post))

    return GameArm(branches=branches, sample_probability=sample_probability)


def run_sem(scheme, mgen, adversary, simulator, dist,
            policy: Optional[OraclePolicy] = None,
            config: Optional[GameConfig] = None) -> AdvantageEstimate:
    """Distinguisher-based semantic security with a target register F.

    Real arm: encrypt M, run the adversary on (ciphertext, E) with F held
    out, then let the distinguisher see (adversary output, F).  Ideal arm:
    the simulator sees only (E, F untouched).
    """
    policy = policy or OraclePolicy.plain()
    config = config or GameConfig()

    def success(out_state, mcase, ctx):
        return dist.prob_one(None, out_state, ctx)

    real = _sem_real_arm(scheme, mgen, adversary, success, policy, config)
    ideal = _sem_ideal_arm(scheme, mgen, simulator, success, ("M",), policy, config)
    return estimate(
        real, ideal,
        exact=config.exact, trials=config.trials,
        rng=config.stream("sem"), cap=config.enum_cap,
    )


def _classical_target(state: DensityMatrix) -> str:
    """Read the F register's basis value; reject non-classical targets."""
    dist = measurement_distribution(state, "F")
    for outcome, p in dist.items():
        if (isinstance(p, Fraction) and p == 1) or (not isinstance(p, Fraction) and p > 1 - 1e-9):
            point = outcome
            break
    else:
        raise RoleError("target register F is not a computational-basis state")
    # The target must also be unentangled from the rest of the state.
    rest = partial_trace(state, "F")
    from .quantum import basis_state

    rebuilt = tensor(rest, basis_state(point, "F", state.exact))
    if trace_distance(rebuilt, _move_f_last(state)) > 1e-9:
        raise RoleError("target register F is correlated with the message state")
    return point


def _move_f_last(state: DensityMatrix) -> DensityMatrix:
    """Reorder registers so F is last (layout-normal form for comparisons)."""
    if state.names[-1] == "F":
        return state
    from .quantum import _split_targets, Register

    arr, t_dim, r_dim, rest_layout, t_qubits = _split_targets(state, ("F",))
    # arr is indexed (F, rest, F', rest'); reassemble as (rest, F) ordering.
    import numpy as np

    full = state.dim
    out = np.empty((full, full), dtype=state.mat.dtype)
    for a in range(t_dim):
        for b in range(t_dim):
            block = arr[a, :, b, :]
            for i in range(r_dim):
                for j in range(r_dim):
                    out[i * t_dim + a, j * t_dim + b] = block[i, j]
    layout = rest_layout + (Register("F", t_qubits),)
    return DensityMatrix(out, layout, validate=False)


def _compare_out(out_state: DensityMatrix, target: str, exact: bool):
    """Probability that the measured OUT register equals the target string.

    A missing or wrongly sized output register counts as failure, matching
    the defined comparison for classical targets.
    """
    zero = Fraction(0) if exact else 0.0
    if not out_state.has_register("OUT"):
        return zero
    if out_state.register("OUT").qubits != len(target):
        return zero
    dist = measurement_distribution(out_state, "OUT")
    return dist.get(target, zero)


def run_sem2(scheme, mgen, adversary, simulator,
             policy: Optional[OraclePolicy] = None,
             config: Optional[GameConfig] = None) -> AdvantageEstimate:
    """Classical-target semantic security.

    The generator's F register must hold a basis string y, unentangled
    with (M, E).  Outputs are measured in the computational basis and
    compared to y; a length mismatch counts as failure.
    """
    policy = policy or OraclePolicy.plain()
    config = config or GameConfig()

    def success(out_state, mcase, ctx):
        target = _classical_target(mcase.state)
        return _compare_out(out_state, target, out_state.exact)

    def strip_f(gen):
        class _Stripped(MessageGenerator):
            def cases(self, pk, ctx):
                out = []
                for case in gen.cases(pk, ctx):
                    _classical_target(case.state)  # mode check up front
                    out.append(
                        MessageCase(
                            case.weight,
                            case.state,
                            transcript=case.transcript,
                        )
                    )
                return out

        return _Stripped()

    checked = strip_f(mgen)

    def adv_on_me(tag, state, ctx, channel):
        me = partial_trace(state, "F") if state.has_register("F") else state
        return channel.transform(tag, me, ctx)

    class _FBlindChannel(Channel):
        def __init__(self, inner):
            self.inner = inner

        def cases(self, ctx):
            return [(w, _FBlindChannel(c)) for w, c in self.inner.cases(ctx)]

        def transform(self, tag, state, ctx):
            return adv_on_me(tag, state, ctx, self.inner)

    real = _sem_real_arm(scheme, checked, _FBlindChannel(adversary), success, policy, config)
    ideal = _sem_ideal_arm(
        scheme, checked, _FBlindChannel(simulator), success, ("M", "F"), policy, config
    )
    return estimate(
        real, ideal,
        exact=config.exact, trials=config.trials,
        rng=config.stream("sem2"), cap=config.enum_cap,
    )


@dataclass(frozen=True)
class GeneratorFunctionPair:
    """A message generator together with the public circuit applied to its transcript."""

    mgen: MessageGenerator
    fn: object  # ClassicalFunction


def run_sem3(scheme, pair: GeneratorFunctionPair, adversary, simulator,
             policy: Optional[OraclePolicy] = None,
             config: Optional[GameConfig] = None) -> AdvantageEstimate:
    """Transcript-function semantic security.

    The generator declares the transcript x of its measurements; both the
    adversary's and the simulator's measured outputs are compared against
    fn(pk, x).  The function's declared arity must match the transcript.
    """
    policy = policy or OraclePolicy.plain()
    config = config or GameConfig()
    mgen, fn = pair.mgen, pair.fn

    def success(out_state, mcase, ctx):
        if mcase.transcript is None:
            raise RoleError("this game needs a generator that declares its transcript")
        target = fn.evaluate(ctx.pk, mcase.transcript)
        return _compare_out(out_state, target, out_state.exact)

    real = _sem_real_arm(scheme, mgen, adversary, success, policy, config)
    ideal = _sem_ideal_arm(scheme, mgen, simulator, success, ("M", "F"), policy, config)
    return estimate(
        real, ideal,
        exact=config.exact, trials=config.trials,
        rng=config.stream("sem3"), cap=config.enum_cap,
    )


GAME_NAMES = ("ind", "ind-prime", "ind-cpa", "ind-cca1", "sem", "sem2", "sem3")
