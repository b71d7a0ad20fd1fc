"""Multi-base commitments over a prime-order group.

An identity is an ordered scalar tuple (X0, ..., Xn); its public form is the
single group element h = prod(g_j ** X_j) over a published generator list.
Index 0 is reserved for a user-chosen random blinding exponent, which keeps
commitments over guessable field values safe from dictionary attacks.

Commitments over disjoint generator sets multiply together into a commitment
over the concatenated sets, which is how credentials from two independent
issuers are presented as one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .group import Element, Group, GroupError, Scalar


class LengthMismatchError(GroupError):
    """Attribute vector and generator set have different lengths."""


class OverlappingGeneratorsError(GroupError):
    """Refusing to combine commitments whose generator sets share elements."""


BLINDING_LABEL = ""


@dataclass(frozen=True)
class GeneratorSet:
    """Ordered generators g0..gn with field labels; index 0 blinds.

    ``blinding_indices`` tracks every reserved slot; concatenated sets (see
    :func:`combine`) have one per constituent issuer.
    """

    group: Group
    generators: tuple[Element, ...]
    labels: tuple[str, ...]
    issuer: str
    blinding_indices: frozenset[int] = frozenset({0})

    def __post_init__(self) -> None:
        if len(self.generators) != len(self.labels):
            raise LengthMismatchError("one label per generator required")
        if not self.generators:
            raise GroupError("generator set may not be empty")
        identity = self.group.identity()
        seen = set()
        for g in self.generators:
            enc = self.group.encode_element(g)
            if g == identity:
                raise GroupError("the group identity may not be a generator")
            if enc in seen:
                raise GroupError("generators must be distinct")
            seen.add(enc)
        if 0 not in self.blinding_indices:
            raise GroupError("index 0 must be a blinding slot")
        for i in self.blinding_indices:
            if self.labels[i] != BLINDING_LABEL:
                raise GroupError(f"blinding slot {i} must carry the empty label")
        warm = getattr(self.group, "warm", None)
        if warm is not None:
            for g in self.generators:
                warm(g)

    @classmethod
    def derive(cls, group: Group, issuer: str, field_labels: tuple[str, ...] | list[str]) -> "GeneratorSet":
        """Derive g0..gn from public tags; g0 is the blinding generator."""
        labels = (BLINDING_LABEL,) + tuple(field_labels)
        gens = []
        seen: set[bytes] = set()
        for i, label in enumerate(labels):
            counter = 0
            while True:
                tag = f"{issuer}|{i}|{label}|{counter}".encode()
                g = group.derive_generator(tag)
                enc = group.encode_element(g)
                if enc not in seen:
                    seen.add(enc)
                    gens.append(g)
                    break
                counter += 1  # tiny groups collide; retry with a fresh tag
        return cls(group, tuple(gens), labels, issuer)

    def __len__(self) -> int:
        return len(self.generators)

    def index_of(self, label: str) -> int:
        if label == BLINDING_LABEL:
            raise KeyError("blinding slots have no addressable label")
        return self.labels.index(label)

    def concat(self, other: "GeneratorSet") -> "GeneratorSet":
        if other.group is not self.group:
            raise GroupError("cannot concatenate sets over different groups")
        mine = {self.group.encode_element(g) for g in self.generators}
        for g in other.generators:
            if self.group.encode_element(g) in mine:
                raise OverlappingGeneratorsError(
                    "generator sets overlap; the combined commitment would be ambiguous"
                )
        offset = len(self)
        shifted = frozenset(i + offset for i in other.blinding_indices)
        return GeneratorSet(
            self.group,
            self.generators + other.generators,
            self.labels + other.labels,
            f"{self.issuer}+{other.issuer}",
            self.blinding_indices | shifted,
        )


@dataclass(frozen=True)
class AttributeVector:
    """Scalar tuple (X0, ..., Xn) with X0 the blinding exponent."""

    group: Group
    scalars: tuple[Scalar, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "scalars", tuple(x % self.group.order for x in self.scalars)
        )

    @classmethod
    def with_blinding(cls, group: Group, values, rng) -> "AttributeVector":
        """Prepend a fresh uniform blinding scalar to the field values."""
        return cls(group, (group.random_scalar(rng),) + tuple(values))

    def __len__(self) -> int:
        return len(self.scalars)

    @property
    def blinding(self) -> Scalar:
        return self.scalars[0]

    def concat(self, other: "AttributeVector") -> "AttributeVector":
        if other.group is not self.group:
            raise GroupError("cannot concatenate vectors over different groups")
        return AttributeVector(self.group, self.scalars + other.scalars)


@dataclass(frozen=True)
class DlrepCommitment:
    """A committed identity: the element h plus the generators it is over."""

    element: Element
    gens: GeneratorSet

    @property
    def group(self) -> Group:
        return self.gens.group

    def encode(self) -> bytes:
        return self.group.encode_element(self.element)


def commit(attrs: AttributeVector, gens: GeneratorSet) -> DlrepCommitment:
    """h = prod(g_j ** X_j); deterministic in its inputs."""
    if attrs.group is not gens.group:
        raise GroupError("attribute vector and generators use different groups")
    if len(attrs) != len(gens):
        raise LengthMismatchError(
            f"{len(attrs)} attributes vs {len(gens)} generators"
        )
    h = gens.group.multi_power(zip(gens.generators, attrs.scalars))
    return DlrepCommitment(h, gens)


def blind_contribution(x0: Scalar, gens: GeneratorSet) -> Element:
    """g0 ** x0 -- the user-side share sent to an issuer at enrollment."""
    return gens.group.power(gens.generators[0], x0)


def issue_commitment(
    blinded: Element, issuer_attrs, gens: GeneratorSet
) -> DlrepCommitment:
    """Finish a commitment from the user's blinded share and issuer fields.

    ``issuer_attrs`` are X1..Xn; the result equals ``commit((x0, X1..Xn))``
    whenever ``blinded == g0 ** x0``.
    """
    group = gens.group
    if not group.is_valid(blinded):
        raise GroupError("blinded contribution is not a valid group element")
    issuer_attrs = tuple(issuer_attrs)
    if len(issuer_attrs) != len(gens) - 1:
        raise LengthMismatchError(
            f"{len(issuer_attrs)} issuer attributes vs {len(gens) - 1} field slots"
        )
    h = group.op(
        blinded, group.multi_power(zip(gens.generators[1:], issuer_attrs))
    )
    return DlrepCommitment(h, gens)


def combine(c1: DlrepCommitment, c2: DlrepCommitment) -> DlrepCommitment:
    """Multiply two commitments into one over the concatenated generators.

    Requires disjoint generator sets; with overlap the exponents of shared
    generators would collapse additively and the result would not represent
    the concatenated attribute tuple.
    """
    gens = c1.gens.concat(c2.gens)
    return DlrepCommitment(c1.group.op(c1.element, c2.element), gens)
