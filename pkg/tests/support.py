"""Shared builders for the test suite."""
import numpy as np

from atomdiode.fields import assemble
from atomdiode.params import CM_PER_S, MICRON
from atomdiode.profiles import GaussianProfile
from atomdiode.scheme import Incidence, LaserField, SchemeConfig, SchemeKind, build_channels


def gaussian(peak, center_um, width_um=15.0):
    return GaussianProfile(peak, center_um * MICRON, width_um * MICRON)


def laser(peak, center_um, v0_cm=0.0, dv_cm=0.0, width_um=15.0, y_sign=1):
    return LaserField(gaussian(peak, center_um, width_um), v0_cm * CM_PER_S, dv_cm * CM_PER_S, y_sign)


def zero_two_level(**kw):
    base = dict(kind=SchemeKind.TWO_LEVEL, pump=laser(0, 0), quench=laser(0, 0),
                mirror1=gaussian(0, 0), mirror2=gaussian(0, 0))
    base.update(kw)
    return SchemeConfig(**base)


def setup(config, w_cm, theta_deg, channel=0):
    inc = Incidence.from_cm_deg(w_cm, theta_deg, channel)
    ch = build_channels(config, inc)
    return assemble(config, ch), ch, inc


def random_scheme(rng, kind, gamma=0.0):
    """Random configuration with every field switched on."""
    def rl(center_range, peak_range, v0=(0.0, 3.0), dv=(-2e-9, 2e-9), sign=1):
        return laser(rng.uniform(*peak_range), rng.uniform(*center_range), rng.uniform(*v0),
                     rng.uniform(*dv), rng.uniform(5, 20), sign)

    common = dict(
        pump=rl((-30, 30), (1e5, 5e6)),
        quench=rl((60, 150), (1e5, 5e6)),
        gamma=gamma,
        mirror1=gaussian(rng.uniform(1e6, 4e7), rng.uniform(30, 90), rng.uniform(5, 20)),
    )
    if kind is SchemeKind.TWO_LEVEL:
        return SchemeConfig(kind, mirror2=gaussian(rng.uniform(1e6, 4e7), rng.uniform(-90, -30),
                                                   rng.uniform(5, 20)), **common)
    return SchemeConfig(kind, stokes=rl((-40, 0), (1e5, 5e6), sign=-1), **common)


def all_open(channels):
    return all(channels.is_open(j) for j in range(channels.n))


def max_prob_diff(a, b):
    return float(max(np.max(np.abs(a.PR - b.PR)), np.max(np.abs(a.PT - b.PT))))
