"""Regenerate the bundled synthetic microbiome dataset.

Draws n rows from the model1 preset (the bundled real-data-scale hybrid
fit), thins them to multinomial counts, and writes the package data CSV.
The seed is fixed so the artifact is reproducible; rerunning this script
must not change the checked-in file.
"""

import os

from compscore import registry
from compscore.core import CountDataset
from compscore.io import write_counts_csv
from compscore.samplers import RngConfig, sample_hybrid, sample_multinomial_counts

SEED = 5
N = 92
TOTALS = 2000
NAMES = ("taxon1", "taxon2", "taxon3", "taxon4", "other")

OUT = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "src", "compscore", "data", "synthetic_microbiome_counts.csv",
)


def main():
    entry = registry.get("model1")
    rng = RngConfig(SEED)
    latent, _ = sample_hybrid(entry.spec, N, rng.substream(0))
    counts = sample_multinomial_counts(latent, TOTALS, rng.substream(1))
    counts = CountDataset(counts.counts, totals=counts.totals, names=NAMES)
    write_counts_csv(OUT, counts)
    zeros = (counts.counts == 0).mean(axis=0)
    print(f"wrote {OUT}: {counts.n} rows, zero fractions {zeros.round(2)}")


if __name__ == "__main__":
    main()
