"""Encryption schemes for quantum payloads behind one common interface.

Every scheme here has the same shape: encryption draws classical coins,
derives a (tag, pad) pair from them, conjugates the payload by the pad
operator and attaches the tag in the clear; decryption recomputes the pad
from the tag and undoes the conjugation.  Because tags are classical
bitstrings by construction, the "measure the tag register" step of
decryption is a plain read and the question of superposed tags never
arises.

The catalogue:

* ``PrfSymmetricScheme``   - tag is fresh randomness, pad = PRF_k(tag);
* ``PermutationPublicScheme`` - tag is the 2n-fold image of a sampled
  domain element, pad = the iterated-permutation generator's output;
* idealized variants (truly random pad) and deliberately broken variants
  (identity encryption, constant PRF, pad-skipping decryption) used as
  positive/negative controls in the security games.

Scheme objects are immutable after construction and key material is
immutable after keygen; encrypt/decrypt are pure given an explicit
stream, so concurrent trials with per-trial streams are safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import (
    DimensionMismatchError,
    EnumerationCapError,
    InvalidCiphertextError,
    MalformedKeyError,
    QelabError,
)
from .primitives import (
    GgmPrf,
    InnerProductPredicate,
    IteratedPermutationPrg,
    RandomFunctionOracle,
    ToyRsaPermutationFamily,
    TowpIndex,
    TowpTrapdoor,
    prg_iterated,
)
from .quantum import DensityMatrix, apply_pauli, basis_state, pauli_from_key, tensor
from .rng import Stream


class KeyPair(NamedTuple):
    ek: object  # encryption key (symmetric key or public index)
    dk: object  # decryption key (same key or trapdoor material)


@dataclass(frozen=True, eq=False)
class Ciphertext:
    """Classical tag plus quantum payload."""

    tag: str
    payload: DensityMatrix


@dataclass(frozen=True, eq=False)
class SkeCiphertext(Ciphertext):
    def __post_init__(self):
        if len(self.tag) != 2 * self.payload.qubits:
            raise InvalidCiphertextError(
                f"tag of {len(self.tag)} bits does not fit a "
                f"{self.payload.qubits}-qubit payload"
            )


@dataclass(frozen=True, eq=False)
class PkeCiphertext(Ciphertext):
    def __post_init__(self):
        if not self.tag or any(b not in "01" for b in self.tag):
            raise InvalidCiphertextError("tag must be a nonempty 0/1 string")


@dataclass(frozen=True)
class EncryptionCase:
    """One realization of the encryption coins: weight, tag, pad."""

    weight: Fraction
    tag: str
    pad: Optional[str]  # None means the payload is passed through untouched


class PauliTagScheme:
    """Shared machinery for tag-plus-pad schemes; see module docstring."""

    name = "scheme"
    flavor = "symmetric"

    def __init__(self, n: int, qubits: int):
        if n < 1 or qubits < 1:
            raise DimensionMismatchError("security parameter and qubits must be positive")
        self.n = n
        self.qubits = qubits

    # -- key material ------------------------------------------------------
    def keygen(self, rng: Stream) -> KeyPair:
        raise NotImplementedError

    def key_cases(self) -> Optional[list[tuple[Fraction, KeyPair]]]:
        """Enumerate the key space with weights, or None if impractical."""
        return None

    # -- encryption coins ---------------------------------------------------
    def sample_encryption(self, ek, rng: Stream) -> EncryptionCase:
        raise NotImplementedError

    def encrypt_cases(self, ek) -> Optional[list[EncryptionCase]]:
        """Enumerate the encryption coin space, or None if impractical."""
        return None

    def decrypt_pad(self, dk, tag: str) -> Optional[str]:
        raise NotImplementedError

    def make_ciphertext(self, tag: str, payload: DensityMatrix) -> Ciphertext:
        return Ciphertext(tag, payload)

    # -- public API ----------------------------------------------------------
    def _check_plaintext(self, rho: DensityMatrix) -> None:
        if rho.qubits != self.qubits:
            raise DimensionMismatchError(
                f"plaintext has {rho.qubits} qubits, scheme expects {self.qubits}"
            )

    def encrypt(self, ek, rho: DensityMatrix, rng: Stream) -> Ciphertext:
        self._check_plaintext(rho)
        case = self.sample_encryption(ek, rng)
        payload = apply_pauli(case.pad, rho) if case.pad is not None else rho
        return self.make_ciphertext(case.tag, payload)

    def decrypt(self, dk, ct: Ciphertext) -> DensityMatrix:
        pad = self.decrypt_pad(dk, ct.tag)
        return apply_pauli(pad, ct.payload) if pad is not None else ct.payload

    # -- linear round-trip channel (for Choi-state comparisons) --------------
    def roundtrip_map(
        self,
        keypair: KeyPair,
        rng: Optional[Stream] = None,
        coin_samples: int = 16,
        enumerate_coins: bool = True,
    ) -> Callable[[np.ndarray], np.ndarray]:
        """Decrypt-after-encrypt as a linear map on raw payload matrices.

        Averages over the scheme's encryption coins: the full case list
        when it is enumerable (and `enumerate_coins` is left on),
        otherwise `coin_samples` draws from `rng`.
        """
        cases = self.encrypt_cases(keypair.ek) if enumerate_coins else None
        if cases is None:
            if rng is None:
                raise EnumerationCapError(
                    "coin space is not enumerable; supply an rng for sampling"
                )
            cases = []
            for i in range(coin_samples):
                drawn = self.sample_encryption(keypair.ek, rng.child(f"coin{i}"))
                cases.append(EncryptionCase(Fraction(1, coin_samples), drawn.tag, drawn.pad))
        ops = []
        for case in cases:
            enc_op = (
                pauli_from_key(case.pad) if case.pad is not None else np.eye(2**self.qubits)
            )
            dec_pad = self.decrypt_pad(keypair.dk, case.tag)
            dec_op = (
                pauli_from_key(dec_pad) if dec_pad is not None else np.eye(2**self.qubits)
            )
            ops.append((float(case.weight), np.dot(dec_op, enc_op)))

        def channel(mat: np.ndarray) -> np.ndarray:
            out = np.zeros_like(mat, dtype=np.complex128)
            for weight, op in ops:
                out += weight * np.dot(np.dot(op, mat), op.conj().T)
            return out

        return channel

    def describe(self) -> str:
        return f"{self.name} (flavor={self.flavor}, n={self.n}, qubits={self.qubits})"


def _all_bitstrings(length: int) -> list[str]:
    return [format(v, f"0{length}b") for v in range(1 << length)] if length else [""]


# ---------------------------------------------------------------------------
# Symmetric scheme from a PRF
# ---------------------------------------------------------------------------


def build_ggm_prf(n: int, qubits: int, rng: Stream) -> GgmPrf:
    """The default PRF: a GGM tree over the iterated-permutation generator."""
    family = ToyRsaPermutationFamily(max(n, 3))
    index, _ = family.generate(rng.child("prf-family"))
    prg = IteratedPermutationPrg(family, index, seed_len=n, out_len=2 * n)
    return GgmPrf(prg, in_len=2 * qubits, out_len=2 * qubits)


class PrfSymmetricScheme(PauliTagScheme):
    """Symmetric encryption: fresh random tag, pad derived by a keyed PRF."""

    name = "ske-prf"

    def __init__(self, n: int, qubits: int, prf=None, setup_rng: Optional[Stream] = None):
        super().__init__(n, qubits)
        if prf is None:
            prf = build_ggm_prf(n, qubits, setup_rng or Stream(0x5E7).child("prf"))
        if prf.key_len != n or prf.in_len != 2 * qubits or prf.out_len != 2 * qubits:
            raise DimensionMismatchError(
                f"scheme at n={n}, qubits={qubits} needs a "
                f"{n} x {2*qubits} -> {2*qubits} PRF, got "
                f"{prf.key_len} x {prf.in_len} -> {prf.out_len}"
            )
        self.prf = prf

    def keygen(self, rng: Stream) -> KeyPair:
        k = rng.bits(self.n)
        return KeyPair(k, k)

    def key_cases(self):
        return [
            (Fraction(1, 1 << self.n), KeyPair(k, k)) for k in _all_bitstrings(self.n)
        ]

    def sample_encryption(self, ek, rng: Stream) -> EncryptionCase:
        tag = rng.bits(2 * self.qubits)
        return EncryptionCase(Fraction(1), tag, self.prf.evaluate(ek, tag))

    def encrypt_cases(self, ek):
        tags = _all_bitstrings(2 * self.qubits)
        w = Fraction(1, len(tags))
        return [EncryptionCase(w, tag, self.prf.evaluate(ek, tag)) for tag in tags]

    def decrypt_pad(self, dk, tag: str) -> str:
        if len(tag) != 2 * self.qubits or any(b not in "01" for b in tag):
            raise InvalidCiphertextError(
                f"tag must be {2 * self.qubits} bits of 0/1, got {tag!r}"
            )
        return self.prf.evaluate(dk, tag)

    def make_ciphertext(self, tag, payload):
        return SkeCiphertext(tag, payload)


class PadSkippingDecryptScheme(PrfSymmetricScheme):
    """Deliberately corrupted variant: decryption forgets to undo the pad."""

    name = "ske-prf-skipdec"

    def decrypt_pad(self, dk, tag):
        super().decrypt_pad(dk, tag)  # keep the tag validation
        return None


class RandomPadSymmetricScheme(PauliTagScheme):
    """Idealized variant: pads come from a truly random function of the tag.

    Key material is a lazily sampled random-function oracle, so encrypt
    and decrypt stay consistent.  In an oracle-free game the challenge tag
    is the only query ever made, so the enumeration-mode coin space is
    simply a uniform independent (tag, pad) pair.
    """

    name = "ske-randomfn"

    def keygen(self, rng: Stream) -> KeyPair:
        fn = RandomFunctionOracle(2 * self.qubits, 2 * self.qubits, rng.child("fn"))
        return KeyPair(fn, fn)

    def key_cases(self):
        return [(Fraction(1), KeyPair(None, None))]

    def sample_encryption(self, ek, rng: Stream) -> EncryptionCase:
        tag = rng.bits(2 * self.qubits)
        if ek is None:  # enumeration-mode stand-in key: pad is free randomness
            return EncryptionCase(Fraction(1), tag, rng.bits(2 * self.qubits))
        return EncryptionCase(Fraction(1), tag, ek.query(tag))

    def encrypt_cases(self, ek):
        tags = _all_bitstrings(2 * self.qubits)
        pads = _all_bitstrings(2 * self.qubits)
        w = Fraction(1, len(tags) * len(pads))
        return [EncryptionCase(w, tag, pad) for tag in tags for pad in pads]

    def decrypt_pad(self, dk, tag: str) -> str:
        if dk is None:
            raise QelabError("the enumeration-mode stand-in key cannot decrypt")
        return dk.query(tag)

    def make_ciphertext(self, tag, payload):
        return SkeCiphertext(tag, payload)

    def roundtrip_map(self, keypair, rng=None, coin_samples=16, enumerate_coins=True):
        # The enumerated coin space is the challenge's marginal (tag, pad)
        # distribution, valid for oracle-free games only; a round trip must
        # read the pad back out of the key's function oracle, so sample.
        return super().roundtrip_map(keypair, rng, coin_samples, enumerate_coins=False)


class QotpScheme(PauliTagScheme):
    """The information-theoretic pad: the key is the pad, used once."""

    name = "qotp"

    def keygen(self, rng: Stream) -> KeyPair:
        pad = rng.bits(2 * self.qubits)
        return KeyPair(pad, pad)

    def key_cases(self):
        pads = _all_bitstrings(2 * self.qubits)
        w = Fraction(1, len(pads))
        return [(w, KeyPair(p, p)) for p in pads]

    def sample_encryption(self, ek, rng: Stream) -> EncryptionCase:
        return EncryptionCase(Fraction(1), "", ek)

    def encrypt_cases(self, ek):
        return [EncryptionCase(Fraction(1), "", ek)]

    def decrypt_pad(self, dk, tag: str) -> str:
        return dk


class IdentityScheme(PauliTagScheme):
    """No encryption at all; the canonical broken scheme."""

    name = "identity"

    def keygen(self, rng: Stream) -> KeyPair:
        return KeyPair("", "")

    def key_cases(self):
        return [(Fraction(1), KeyPair("", ""))]

    def sample_encryption(self, ek, rng: Stream) -> EncryptionCase:
        return EncryptionCase(Fraction(1), "", None)

    def encrypt_cases(self, ek):
        return [EncryptionCase(Fraction(1), "", None)]

    def decrypt_pad(self, dk, tag: str):
        return None


# ---------------------------------------------------------------------------
# Public-key scheme from a trapdoor permutation
# ---------------------------------------------------------------------------


class PkeSecret(NamedTuple):
    index: TowpIndex
    trapdoor: TowpTrapdoor


class PermutationPublicScheme(PauliTagScheme):
    """Public-key encryption: pad bits are hard-core bits of iterates.

    Encryption samples a domain element d, iterates the public permutation
    2n times to make the tag, and pads the payload with the generator
    output of seed d.  Decryption walks the tag backwards with the
    trapdoor, reading one hard-core bit per step; the bits come out in
    exactly the generator's order, so the decryption pad equals the
    encryption pad bit for bit.
    """

    name = "pke-towp"
    flavor = "public"

    def __init__(self, n: int, qubits: int):
        super().__init__(n, qubits)
        self.family = ToyRsaPermutationFamily(n)
        if self.family.modulus_bits < 2 * qubits + 2:
            raise DimensionMismatchError(
                f"{self.family.modulus_bits}-bit modulus too small for {qubits} qubits"
            )
        self.hc = InnerProductPredicate()

    def keygen(self, rng: Stream) -> KeyPair:
        index, trapdoor = self.family.generate(rng)
        return KeyPair(index, PkeSecret(index, trapdoor))

    def _pad_from_seed(self, index: TowpIndex, d: int) -> str:
        return prg_iterated(self.family, self.hc, index, d, 2 * self.qubits)

    def _tag_from_seed(self, index: TowpIndex, d: int) -> str:
        image = self.family.iterate(index, d, 2 * self.qubits)
        return self.family.encode_element(index, image)

    def sample_encryption(self, ek: TowpIndex, rng: Stream) -> EncryptionCase:
        d = self.family.sample(ek, rng)
        return EncryptionCase(Fraction(1), self._tag_from_seed(ek, d), self._pad_from_seed(ek, d))

    def encrypt_cases(self, ek: TowpIndex):
        domain = self.family.domain(ek)
        w = Fraction(1, len(domain))
        return [
            EncryptionCase(w, self._tag_from_seed(ek, d), self._pad_from_seed(ek, d))
            for d in domain
        ]

    def decrypt_pad(self, dk: PkeSecret, tag: str) -> str:
        index, trapdoor = dk
        try:
            s = self.family.decode_element(index, tag)
        except MalformedKeyError as exc:
            raise InvalidCiphertextError(str(exc)) from exc
        if not self.family.contains(index, s):
            raise InvalidCiphertextError(
                f"tag decodes to {s}, outside the domain of {index.modulus}"
            )
        bits = []
        x = s
        for _ in range(2 * self.qubits):
            x = self.family.invert(x, trapdoor)
            bits.append(str(self.hc.evaluate(index, x)))
        return "".join(bits)

    def make_ciphertext(self, tag, payload):
        return PkeCiphertext(tag, payload)


class UniformPadPublicScheme(PermutationPublicScheme):
    """Idealized variant: the tag is genuine but the pad is fresh randomness.

    Not decryptable (the pad is discarded); exists as the positive control
    for which every game's advantage vanishes identically.
    """

    name = "pke-uniformpad"

    def sample_encryption(self, ek: TowpIndex, rng: Stream) -> EncryptionCase:
        d = self.family.sample(ek, rng.child("d"))
        return EncryptionCase(
            Fraction(1), self._tag_from_seed(ek, d), rng.child("pad").bits(2 * self.qubits)
        )

    def encrypt_cases(self, ek: TowpIndex):
        domain = self.family.domain(ek)
        pads = _all_bitstrings(2 * self.qubits)
        w = Fraction(1, len(domain) * len(pads))
        return [
            EncryptionCase(w, self._tag_from_seed(ek, d), pad)
            for d in domain
            for pad in pads
        ]

    def decrypt_pad(self, dk, tag):
        raise QelabError("the uniform-pad variant discards the pad; decryption is undefined")


# ---------------------------------------------------------------------------
# Convenience operations mirroring the scheme algorithms
# ---------------------------------------------------------------------------


def ske_keygen(n: int, rng: Stream) -> str:
    """A uniform n-bit symmetric key."""
    return rng.bits(n)


def ske_encrypt(scheme: PrfSymmetricScheme, k: str, rho: DensityMatrix, rng: Stream):
    return scheme.encrypt(k, rho, rng)


def ske_decrypt(scheme: PrfSymmetricScheme, k: str, ct: Ciphertext) -> DensityMatrix:
    return scheme.decrypt(k, ct)


def pke_keygen(scheme: PermutationPublicScheme, rng: Stream) -> KeyPair:
    return scheme.keygen(rng)


def pke_encrypt(scheme: PermutationPublicScheme, pk: TowpIndex, rho, rng: Stream):
    return scheme.encrypt(pk, rho, rng)


def pke_decrypt(scheme: PermutationPublicScheme, sk: PkeSecret, ct: Ciphertext):
    return scheme.decrypt(sk, ct)


def ciphertext_as_state(ct: Ciphertext, tag_register: str = "T") -> DensityMatrix:
    """Embed the classical tag as a basis-state register next to the payload."""
    if not ct.tag:
        return ct.payload
    return tensor(basis_state(ct.tag, tag_register, ct.payload.exact), ct.payload)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _build_ske_constprf(n, qubits, rng):
    from .primitives import ConstantPrf

    return PrfSymmetricScheme(n, qubits, prf=ConstantPrf(n, 2 * qubits, 2 * qubits))


SCHEME_BUILDERS: dict[str, Callable[[int, int, Stream], PauliTagScheme]] = {
    "ske-prf": lambda n, q, rng: PrfSymmetricScheme(n, q, setup_rng=rng),
    "ske-constprf": _build_ske_constprf,
    "ske-prf-skipdec": lambda n, q, rng: PadSkippingDecryptScheme(n, q, setup_rng=rng),
    "ske-randomfn": lambda n, q, rng: RandomPadSymmetricScheme(n, q),
    "qotp": lambda n, q, rng: QotpScheme(n, q),
    "identity": lambda n, q, rng: IdentityScheme(n, q),
    "pke-towp": lambda n, q, rng: PermutationPublicScheme(n, q),
    "pke-uniformpad": lambda n, q, rng: UniformPadPublicScheme(n, q),
}


def build_scheme(name: str, n: int, qubits: int, rng: Stream) -> PauliTagScheme:
    try:
        builder = SCHEME_BUILDERS[name]
    except KeyError:
        raise QelabError(
            f"unknown scheme {name!r}; registered: {sorted(SCHEME_BUILDERS)}"
        ) from None
    return builder(n, qubits, rng.child("scheme-setup"))
