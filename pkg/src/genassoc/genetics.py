"""From a genetic model (prevalence, MAF, delta, lambda2) to case/control genotype probabilities."""

from __future__ import annotations

from dataclasses import dataclass

NAMED_MODELS = {
    0.0: "recessive",
    0.25: "semi-recessive",
    0.5: "additive",
    0.75: "semi-dominant",
    1.0: "dominant",
}


class PenetranceOverflowError(ValueError):
    """The model needs a penetrance above 1 for the given prevalence and MAF."""


@dataclass(frozen=True)
class GeneticModelSpec:
    """Disease prevalence ``k``, minor (risk) allele frequency, model ``delta`` and
    relative risk ``lambda2`` of the AA genotype; lambda2 = 1 is the null."""

    k: float
    maf: float
    delta: float
    lambda2: float

    def __post_init__(self) -> None:
        if not 0.0 < self.k < 1.0:
            raise ValueError("prevalence k must lie in (0, 1)")
        if not 0.0 < self.maf < 1.0:
            raise ValueError("MAF must lie in (0, 1)")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        if self.lambda2 < 1.0:
            raise ValueError("lambda2 must be at least 1")

    @property
    def lambda1(self) -> float:
        return 1.0 - self.delta + self.delta * self.lambda2

    @property
    def is_null(self) -> bool:
        return self.lambda2 == 1.0

    @property
    def model_name(self) -> str:
        return NAMED_MODELS.get(self.delta, f"delta={self.delta:g}")


@dataclass(frozen=True)
class PopulationParams:
    p0: float
    p1: float
    p2: float
    q0: float
    q1: float
    q2: float

    def __post_init__(self) -> None:
        for vec in (self.cases, self.controls):
            if min(vec) < 0.0:
                raise ValueError(f"negative genotype probability in {vec}")
            if abs(sum(vec) - 1.0) > 1e-12:
                raise ValueError(f"genotype probabilities {vec} do not sum to 1")

    @property
    def cases(self) -> tuple[float, float, float]:
        return (self.p0, self.p1, self.p2)

    @property
    def controls(self) -> tuple[float, float, float]:
        return (self.q0, self.q1, self.q2)

    @classmethod
    def null(cls, g: tuple[float, float, float]) -> PopulationParams:
        return cls(*g, *g)


def hwe_genotype_freqs(maf: float) -> tuple[float, float, float]:
    if not 0.0 < maf < 1.0:
        raise ValueError("MAF must lie in (0, 1)")
    return ((1.0 - maf) ** 2, 2.0 * maf * (1.0 - maf), maf**2)


def penetrances(spec: GeneticModelSpec) -> tuple[float, float, float]:
    """(f0, f1, f2) reproducing the prevalence k = sum f_i g_i."""
    g0, g1, g2 = hwe_genotype_freqs(spec.maf)
    f0 = spec.k / (g0 + spec.lambda1 * g1 + spec.lambda2 * g2)
    f2 = spec.lambda2 * f0
    if f2 > 1.0:
        raise PenetranceOverflowError(
            f"penetrance f2={f2:.4g} exceeds 1 for k={spec.k}, MAF={spec.maf}, "
            f"lambda2={spec.lambda2}"
        )
    return (f0, spec.lambda1 * f0, f2)


def theta_from_model(spec: GeneticModelSpec) -> PopulationParams:
    g = hwe_genotype_freqs(spec.maf)
    if spec.is_null:
        return PopulationParams.null(g)
    f = penetrances(spec)
    k = spec.k
    cases = [fi * gi / k for fi, gi in zip(f, g)]
    controls = [(1.0 - fi) * gi / (1.0 - k) for fi, gi in zip(f, g)]
    # renormalise away the last-ulp drift of the division
    s1, s2 = sum(cases), sum(controls)
    return PopulationParams(*(c / s1 for c in cases), *(c / s2 for c in controls))


def is_monotone(theta: PopulationParams) -> bool:
    """p0/q0 <= p1/q1 <= p2/q2, skipping genotypes absent from both groups."""
    ratios = []
    for p, q in zip(theta.cases, theta.controls):
        if p == 0.0 and q == 0.0:
            continue
        ratios.append(float("inf") if q == 0.0 else p / q)
    tol = 1e-12
    return all(a <= b * (1.0 + tol) + tol for a, b in zip(ratios, ratios[1:]))
