#!/usr/bin/env python3
"""Write a synthetic stand-in for the heart-failure clinical records CSV.

The real UCI file is not redistributed with this repository. This script
produces a file with the same header, row count (299), class balance
(203 survivors / 96 deaths) and value ranges, so the tool chain and the
tests can run without it. The outcome is driven mostly by follow-up time,
ejection fraction, serum creatinine and age; the remaining columns are
independent noise. Numbers produced from it say nothing about the real
cohort.

    python3 tools/make_surrogate_dataset.py data/heart_failure_surrogate.csv
"""

import sys

import numpy as np

HEADER = [
    "age", "anaemia", "creatinine_phosphokinase", "diabetes", "ejection_fraction",
    "high_blood_pressure", "platelets", "serum_creatinine", "serum_sodium", "sex",
    "smoking", "time", "DEATH_EVENT",
]
N_ROWS = 299
N_DEATHS = 96


def standardize(x):
    return (x - x.mean()) / x.std()


def main(path):
    rng = np.random.default_rng(20230628)
    n = N_ROWS
    age = np.clip(np.round(rng.normal(60.8, 11.9, n)), 40, 95)
    anaemia = rng.binomial(1, 0.43, n)
    cpk = np.clip(np.round(rng.lognormal(5.6, 1.0, n)), 23, 7861)
    diabetes = rng.binomial(1, 0.42, n)
    ejection = np.clip(np.round(rng.normal(38.0, 11.8, n)), 14, 80)
    hbp = rng.binomial(1, 0.35, n)
    platelets = np.clip(np.round(rng.normal(263358.0, 97804.0, n), 2), 25100, 850000)
    creatinine = np.clip(np.round(rng.lognormal(np.log(1.2), 0.45, n), 2), 0.5, 9.4)
    sodium = np.clip(np.round(rng.normal(136.6, 4.4, n)), 113, 148)
    sex = rng.binomial(1, 0.65, n)
    smoking = rng.binomial(1, 0.32, n)
    time = rng.integers(4, 286, n).astype(float)

    risk = (-2.4 * standardize(time) - 1.0 * standardize(ejection)
            + 1.0 * standardize(np.log(creatinine)) + 0.8 * standardize(age)
            + rng.normal(0.0, 0.9, n))
    death = np.zeros(n, dtype=int)
    death[np.argsort(-risk, kind="stable")[:N_DEATHS]] = 1

    cols = [age, anaemia, cpk, diabetes, ejection, hbp, platelets, creatinine, sodium,
            sex, smoking, time, death]
    with open(path, "w", newline="\n") as out:
        out.write(",".join(HEADER) + "\n")
        for i in range(n):
            cells = []
            for name, col in zip(HEADER, cols):
                v = col[i]
                if name in ("platelets", "serum_creatinine"):
                    cells.append(f"{v:.2f}")
                else:
                    cells.append(str(int(v)))
            out.write(",".join(cells) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/heart_failure_surrogate.csv")
