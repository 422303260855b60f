"""Preset model registry for simulation studies and demos.

Sixteen presets: interaction models with strong negative-definite
structure (1-2), truncated Gaussians from near-boundary to interior
(3-6), Dirichlet shapes from boundary-heavy to concentrated (7-12), and
multinomial-thinned versions of four of them (13-16). Each entry carries
the cap values used by the capped weight kinds; the thinned entries
default to totals of 2000 per row.
"""

from dataclasses import dataclass

import numpy as np

from .core import ModelSpec
from .errors import ConfigError
from .weights import WeightSpec

__all__ = ["RegistryEntry", "get", "names", "entries"]


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    spec: ModelSpec
    description: str
    cap_min: float
    cap_product: float
    latent: str = None
    default_totals: int = None

    @property
    def discrete(self):
        return self.latent is not None

    def weight(self, kind):
        """WeightSpec with this entry's preset cap for capped kinds."""
        if kind == "capped-min":
            return WeightSpec(kind, self.cap_min)
        if kind == "capped-product":
            return WeightSpec(kind, self.cap_product)
        return WeightSpec(kind)


def _hybrid(p, interaction, shape, estimate_linear=False):
    return ModelSpec(
        family="hybrid",
        p=p,
        interaction=np.asarray(interaction, dtype=float),
        shape=np.asarray(shape, dtype=float),
        estimate_linear=estimate_linear,
    )


def _tgauss(p, interaction, linear, estimate_linear):
    return ModelSpec(
        family="truncated-gaussian",
        p=p,
        interaction=np.asarray(interaction, dtype=float),
        linear=np.asarray(linear, dtype=float),
        estimate_linear=estimate_linear,
    )


def _dirichlet(shape):
    shape = np.asarray(shape, dtype=float)
    return ModelSpec(family="dirichlet", p=shape.size, shape=shape)


_MODEL1_INTERACTION = [
    [-127480.0, 14068.4, 1782.26, -240.077],
    [14068.4, -8191.17, -8.00268, 374.694],
    [1782.26, -8.00268, -46.6387, 9.02763],
    [-240.077, 374.694, 9.02763, -39.2089],
]
_MODEL1_SHAPE = [-0.80, -0.85, 0.0, -0.2, 0.0]


def _build():
    out = {}

    def add(entry):
        out[entry.name] = entry

    add(
        RegistryEntry(
            "model1",
            _hybrid(5, _MODEL1_INTERACTION, _MODEL1_SHAPE),
            "5-part interaction model at microbiome-like fitted values",
            cap_min=0.01,
            cap_product=1e-4,
        )
    )
    add(
        RegistryEntry(
            "model2",
            _hybrid(3, [[-63602.0, 15145.0], [15145.0, -5694.0]], [-0.75, -0.75, -0.75]),
            "3-part interaction model with boundary-heavy shapes",
            cap_min=0.01,
            cap_product=1e-3,
        )
    )
    add(
        RegistryEntry(
            "model3",
            _tgauss(3, [[-26.3678, 5.9598], [5.9598, -35.8885]], [0.0, 0.0], False),
            "3-part truncated Gaussian centred on the boundary corner",
            cap_min=0.1,
            cap_product=0.02,
        )
    )
    for idx, (scale, lin, cmin, cprod) in enumerate(
        [(-5000.0, 400.0, 0.1, 2e-7), (-500.0, 40.0, 0.02, 1e-7), (-50.0, 4.0, 0.02, 1e-7)],
        start=4,
    ):
        add(
            RegistryEntry(
                f"model{idx}",
                _tgauss(10, scale * np.eye(9), lin * np.ones(9), True),
                f"10-part truncated Gaussian, concentration scale {-scale:g}",
                cap_min=cmin,
                cap_product=cprod,
            )
        )
    dirichlet_shapes = {
        "model7": ([-0.5, 0.70, 540.0], 0.01, 1e-3),
        "model8": ([-0.8] * 10, 0.002, 1e-8),
        "model9": ([9.0] * 10, 0.17, 6e-6),
        "model10": ([-0.8] * 5 + [9.0] * 5, 0.002, 2e-9),
        "model11": ([-0.8] * 2 + [9.0] * 8, 0.005, 2e-7),
        "model12": ([-0.8] * 8 + [9.0] * 2, 0.001, 5e-11),
    }
    for name, (shape, cmin, cprod) in dirichlet_shapes.items():
        add(
            RegistryEntry(
                name,
                _dirichlet(shape),
                f"Dirichlet with shapes {shape!r}"[:72],
                cap_min=cmin,
                cap_product=cprod,
            )
        )
    thinned = {
        "model13": ("model1", 0.01, 1e-4),
        "model14": ("model2", 0.01, 1e-3),
        "model15": ("model3", 0.1, 0.02),
        "model16": ("model7", 0.01, 1e-3),
    }
    for name, (latent, cmin, cprod) in thinned.items():
        add(
            RegistryEntry(
                name,
                out[latent].spec,
                f"multinomial counts (totals 2000) over {latent} draws",
                cap_min=cmin,
                cap_product=cprod,
                latent=latent,
                default_totals=2000,
            )
        )
    return out


_ENTRIES = _build()


def names():
    return sorted(_ENTRIES, key=lambda s: int(s.removeprefix("model")))


def entries():
    return [_ENTRIES[k] for k in names()]


def get(name):
    key = str(name).strip().lower()
    if key.isdigit():
        key = f"model{key}"
    try:
        return _ENTRIES[key]
    except KeyError:
        raise ConfigError(
            f"unknown model preset {name!r}; available: {', '.join(names())}"
        ) from None
