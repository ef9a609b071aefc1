"""Pluggable game roles: message generators, distinguishers, channels.

Roles are deterministic by default and expose their randomness as explicit
weighted cases, which is what lets the enumeration-mode games compute
probabilities as exact Fractions.  A role that wants private coins or
oracle interaction can still do so through the `RoleContext`, at the price
of only being runnable in sampling mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import OraclePolicyError, RoleError
from .quantum import (
    DensityMatrix,
    basis_state,
    measure_registers_into,
    measurement_distribution,
    partial_trace,
    rename_register,
    replace_with_zero_state,
    tensor,
)
from .rng import Stream


class _DeniedOracles:
    """Oracle stand-in for enumeration mode, where coin spaces must be declared."""

    def encrypt(self, rho):
        raise OraclePolicyError("oracle access is not available in exact mode")

    def decrypt(self, ct):
        raise OraclePolicyError("oracle access is not available in exact mode")


DENIED_ORACLES = _DeniedOracles()


@dataclass
class RoleContext:
    """Everything a role may legitimately touch during one game run."""

    pk: object = None
    oracles: object = DENIED_ORACLES
    rng: Optional[Stream] = None
    exact: bool = False
    scheme: object = None

    def coin(self) -> Stream:
        if self.rng is None:
            raise RoleError("this role needs private coins; run in sampling mode")
        return self.rng


@dataclass(frozen=True)
class MessageCase:
    """One deterministic branch of a message generator."""

    weight: Fraction
    state: DensityMatrix
    transcript: Optional[str] = None


def sample_case(cases: list[MessageCase], rng: Stream) -> MessageCase:
    if len(cases) == 1:
        return cases[0]
    r = rng.uniform()
    acc = 0.0
    for case in cases:
        acc += float(case.weight)
        if r < acc:
            return case
    return cases[-1]


# ---------------------------------------------------------------------------
# Message generators
# ---------------------------------------------------------------------------


class MessageGenerator:
    """Produces the challenge state over named registers (M, optional E/F)."""

    def cases(self, pk, ctx: RoleContext) -> list[MessageCase]:
        raise NotImplementedError


class BasisMessage(MessageGenerator):
    """Deterministic computational-basis plaintext, no side information."""

    def __init__(self, bits: str):
        self.bits = bits

    def cases(self, pk, ctx):
        return [MessageCase(Fraction(1), basis_state(self.bits, "M", ctx.exact))]


class BasisMessageWithTarget(MessageGenerator):
    """Basis plaintext plus a classical copy of it in the target register F."""

    def __init__(self, bits: str):
        self.bits = bits

    def cases(self, pk, ctx):
        state = tensor(
            basis_state(self.bits, "M", ctx.exact),
            basis_state(self.bits, "F", ctx.exact),
        )
        return [MessageCase(Fraction(1), state, transcript=self.bits)]


class EntangledMessage(MessageGenerator):
    """One plaintext qubit maximally entangled with the side-information register."""

    def __init__(self):
        pass

    def cases(self, pk, ctx):
        from .quantum import bell_state

        return [MessageCase(Fraction(1), bell_state("M", "E", ctx.exact))]


class StateMessage(MessageGenerator):
    """Wrap a fixed prepared state (register M required)."""

    def __init__(self, state: DensityMatrix, transcript: Optional[str] = None):
        if not state.has_register("M"):
            raise RoleError("message state must contain a register named M")
        self.state = state
        self.transcript = transcript

    def cases(self, pk, ctx):
        state = self.state.to_exact() if ctx.exact and not self.state.exact else self.state
        if not ctx.exact and state.exact:
            state = state.to_float()
        return [MessageCase(Fraction(1), state, transcript=self.transcript)]


class CoinMessageGenerator(MessageGenerator):
    """Emit the base generator's state or its zeroed-M variant, a fair coin each.

    With `include_f` the coin value is written into a fresh one-qubit F
    register (0 marks the genuine message, 1 the zeroed one); with
    `include_transcript` the coin is appended to the base transcript as a
    bit b, where b=1 marks the genuine message.
    """

    def __init__(self, base: MessageGenerator, include_f: bool = True,
                 include_transcript: bool = False):
        self.base = base
        self.include_f = include_f
        self.include_transcript = include_transcript

    def cases(self, pk, ctx):
        out = []
        for case in self.base.cases(pk, ctx):
            half = case.weight / 2
            genuine = case.state
            zeroed = replace_with_zero_state(case.state, "M")
            base_x = case.transcript or ""
            for state, f_bit, coin in ((genuine, "0", "1"), (zeroed, "1", "0")):
                if self.include_f:
                    state = tensor(state, basis_state(f_bit, "F", ctx.exact))
                transcript = base_x + coin if self.include_transcript else case.transcript
                out.append(MessageCase(half, state, transcript=transcript))
        return out


# ---------------------------------------------------------------------------
# Distinguishers
# ---------------------------------------------------------------------------


class Distinguisher:
    """Binary-output role: measure declared registers, decide classically.

    `prob_one` is the single entry point the games use; for the shipped
    measurement-based roles it is computed exactly from the state's
    diagonal blocks (Fractions in exact mode).
    """

    measured: tuple[str, ...] = ("M",)

    def pre_map(self, tag, state: DensityMatrix, ctx: RoleContext) -> DensityMatrix:
        return state

    def decide(self, tag, outcome: str, ctx: RoleContext) -> int:
        raise NotImplementedError

    def prob_one(self, tag, state: DensityMatrix, ctx: RoleContext):
        mapped = self.pre_map(tag, state, ctx)
        dist = measurement_distribution(mapped, self.measured)
        zero = Fraction(0) if mapped.exact else 0.0
        return sum(
            (p for outcome, p in dist.items() if self.decide(tag, outcome, ctx) == 1),
            zero,
        )


class ConstantDistinguisher(Distinguisher):
    def __init__(self, bit: int):
        self.bit = 1 if bit else 0

    def prob_one(self, tag, state, ctx):
        return Fraction(self.bit) if state.exact else float(self.bit)

    def decide(self, tag, outcome, ctx):
        return self.bit


class CoinDistinguisher(Distinguisher):
    """State-independent fair coin; advantage zero in every game."""

    def prob_one(self, tag, state, ctx):
        return Fraction(1, 2) if state.exact else 0.5

    def decide(self, tag, outcome, ctx):  # pragma: no cover - sampling helper
        raise RoleError("a coin flip has no deterministic decision")


class MeasureEqualsDistinguisher(Distinguisher):
    """Measure one register; output 1 iff the outcome equals a fixed value."""

    def __init__(self, value: str, register: str = "M"):
        self.value = value
        self.register = register
        self.measured = (register,)

    def decide(self, tag, outcome, ctx):
        return 1 if outcome == self.value else 0


class UnpadThenMeasureDistinguisher(MeasureEqualsDistinguisher):
    """Undo a known pad on the register, then compare the measurement."""

    def __init__(self, pad: str, value: str, register: str = "M"):
        super().__init__(value, register)
        self.pad = pad

    def pre_map(self, tag, state, ctx):
        from .quantum import apply_pauli

        return apply_pauli(self.pad, state, self.register)


class CompareRegistersDistinguisher(Distinguisher):
    """Measure two registers jointly; output 1 iff their outcomes agree."""

    def __init__(self, first: str = "OUT", second: str = "F"):
        self.first = first
        self.second = second
        self.measured = (first, second)

    def prob_one(self, tag, state, ctx):
        mapped = self.pre_map(tag, state, ctx)
        width = mapped.register(self.first).qubits
        if mapped.register(self.second).qubits != width:
            return Fraction(0) if mapped.exact else 0.0
        dist = measurement_distribution(mapped, self.measured)
        zero = Fraction(0) if mapped.exact else 0.0
        return sum(
            (p for outcome, p in dist.items() if outcome[:width] == outcome[width:]),
            zero,
        )

    def decide(self, tag, outcome, ctx):
        half = len(outcome) // 2
        return 1 if outcome[:half] == outcome[half:] else 0


class NegatedDistinguisher(Distinguisher):
    """The same strategy with the output bit flipped."""

    def __init__(self, base: Distinguisher):
        self.base = base
        self.measured = base.measured

    def pre_map(self, tag, state, ctx):
        return self.base.pre_map(tag, state, ctx)

    def decide(self, tag, outcome, ctx):
        return 1 - self.base.decide(tag, outcome, ctx)

    def prob_one(self, tag, state, ctx):
        p = self.base.prob_one(tag, state, ctx)
        return (Fraction(1) - p) if isinstance(p, Fraction) else 1.0 - p


# ---------------------------------------------------------------------------
# Channels: adversaries and simulators
# ---------------------------------------------------------------------------


class Channel:
    """A state-to-state role (semantic-security adversary or simulator).

    `transform` must act as the identity on any register it does not own
    (in particular the target register F).  `cases` declares the role's
    internal coin space for enumeration mode; deterministic roles are a
    single case.
    """

    def cases(self, ctx: RoleContext) -> list[tuple[Fraction, "Channel"]]:
        return [(Fraction(1), self)]

    def transform(self, tag, state: DensityMatrix, ctx: RoleContext) -> DensityMatrix:
        raise NotImplementedError


class CopyPayloadAdversary(Channel):
    """Forward the ciphertext payload register as the output, drop the rest."""

    def __init__(self, source: str = "M", out: str = "OUT"):
        self.source = source
        self.out = out

    def transform(self, tag, state, ctx):
        result = rename_register(state, self.source, self.out)
        extras = [r for r in result.names if r not in (self.out, "F")]
        if extras:
            result = partial_trace(result, extras)
        return result


class ConstantOutputChannel(Channel):
    """Ignore the input; emit a fixed basis string (a trivial simulator)."""

    def __init__(self, bits: str, out: str = "OUT"):
        self.bits = bits
        self.out = out

    def transform(self, tag, state, ctx):
        keep = [r for r in state.names if r == "F"]
        drop = [r for r in state.names if r != "F"]
        rest = partial_trace(state, drop) if drop else state
        return tensor(basis_state(self.bits, self.out, state.exact), rest)


class UniformOutputChannel(Channel):
    """Ignore the input; emit a uniformly random string (maximally mixed)."""

    def __init__(self, qubits: int, out: str = "OUT"):
        self.qubits = qubits
        self.out = out

    def transform(self, tag, state, ctx):
        from .quantum import maximally_mixed

        drop = [r for r in state.names if r != "F"]
        rest = partial_trace(state, drop) if drop else state
        return tensor(maximally_mixed(self.qubits, self.out, state.exact), rest)


class BitChannelAdversary(Channel):
    """Run a binary distinguisher as a channel: its bit lands in OUT.

    The distinguisher's declared registers are measured; its decision is
    recorded in a one-qubit output register while correlations with the
    untouched F register survive.  Everything else is discarded.
    """

    def __init__(self, dist: Distinguisher, out: str = "OUT"):
        self.dist = dist
        self.out = out

    def transform(self, tag, state, ctx):
        mapped = self.dist.pre_map(tag, state, ctx)
        targets = [r for r in self.dist.measured if mapped.has_register(r)]
        if not targets:
            raise RoleError(
                f"distinguisher measures {self.dist.measured} but the state has {mapped.names}"
            )
        fn = lambda outcome: str(self.dist.decide(tag, outcome, ctx))
        result = measure_registers_into(mapped, targets, fn, self.out, 1)
        extras = [r for r in result.names if r not in (self.out, "F")]
        if extras:
            result = partial_trace(result, extras)
        return result


class ChannelThenDistinguisher(Distinguisher):
    """Compose a channel with a distinguisher into one distinguisher."""

    def __init__(self, channel: Channel, dist: Distinguisher):
        self.channel = channel
        self.dist = dist
        self.measured = dist.measured

    def prob_one(self, tag, state, ctx):
        total = None
        for weight, instance in self.channel.cases(ctx):
            out = instance.transform(tag, state, ctx)
            p = self.dist.prob_one(None, out, ctx)
            term = (Fraction(weight) * p) if isinstance(p, Fraction) else float(weight) * p
            total = term if total is None else total + term
        return total

    def decide(self, tag, outcome, ctx):  # pragma: no cover - composite role
        raise RoleError("composite distinguishers decide via prob_one")


# ---------------------------------------------------------------------------
# Classical functions for transcript-based semantic security
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassicalFunction:
    """A public classical circuit applied to the generator's transcript."""

    fn: Callable[[object, str], str]
    in_len: Optional[int] = None
    out_len: int = 1

    def evaluate(self, pk, x: str) -> str:
        if self.in_len is not None and len(x) != self.in_len:
            raise RoleError(
                f"transcript has {len(x)} bits but the function consumes {self.in_len}"
            )
        y = self.fn(pk, x)
        if len(y) != self.out_len or any(b not in "01" for b in y):
            raise RoleError(f"classical function returned {y!r}, expected {self.out_len} bits")
        return y


def constant_function(value: str, in_len: Optional[int] = None) -> ClassicalFunction:
    return ClassicalFunction(lambda pk, x: value, in_len=in_len, out_len=len(value))


def identity_function(length: int) -> ClassicalFunction:
    return ClassicalFunction(lambda pk, x: x, in_len=length, out_len=length)


def last_bit_function(in_len: Optional[int] = None) -> ClassicalFunction:
    return ClassicalFunction(lambda pk, x: x[-1], in_len=in_len, out_len=1)
