from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaussianProfile:
    """``peak * exp(-(x - center)**2 / (2 width**2))``; peak in rad/s, lengths in m."""

    peak: float
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"Gaussian width must be positive, got {self.width!r}")

    def __call__(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        return self.peak * np.exp(-0.5 * u * u)

    def scaled(self, factor: float) -> GaussianProfile:
        return GaussianProfile(self.peak * factor, self.center, self.width)

    def reflected(self) -> GaussianProfile:
        return GaussianProfile(self.peak, -self.center, self.width)

    def __mul__(self, other: GaussianProfile) -> GaussianProfile:
        # product of two Gaussians is again Gaussian
        w1, w2 = self.width**2, other.width**2
        var = w1 * w2 / (w1 + w2)
        center = (self.center * w2 + other.center * w1) / (w1 + w2)
        amp = self.peak * other.peak * np.exp(
            -((self.center - other.center) ** 2) / (2.0 * (w1 + w2))
        )
        return GaussianProfile(float(amp), float(center), float(np.sqrt(var)))

    def squared(self) -> GaussianProfile:
        return self * self
