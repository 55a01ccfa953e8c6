#!/usr/bin/env python3
"""Independent reference values for the unit tests.

Recomputes quantities from first principles (numpy / stdlib only) and writes
tests/oracles/oracles.json. Re-run after regenerating the bundled dataset.
"""
import csv
import json
import math
import random
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
DATA = HERE.parent.parent / "data" / "study_area"


def days_in_month(year, month):
    if month == 2:
        leap = year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)
        return 29 if leap else 28
    return 30 if month in (4, 6, 9, 11) else 31


def ra_fao56(lat_deg, doy):
    gsc = 0.0820
    phi = math.radians(lat_deg)
    dr = 1 + 0.033 * math.cos(2 * math.pi * doy / 365)
    dec = 0.409 * math.sin(2 * math.pi * doy / 365 - 1.39)
    ws = math.acos(max(-1.0, min(1.0, -math.tan(phi) * math.tan(dec))))
    return 24 * 60 / math.pi * gsc * dr * (ws * math.sin(phi) * math.sin(dec) +
                                           math.cos(phi) * math.cos(dec) * math.sin(ws))


def et0_month(tmean, td, lat, year, month):
    doy = sum(days_in_month(year, m) for m in range(1, month)) + 15
    daily = 0.0023 * 0.408 * ra_fao56(lat, doy) * max(0.0, tmean + 17.8) * math.sqrt(max(0.0, td))
    return daily * days_in_month(year, month)


def hargreaves_cases():
    cases = []
    for (lat, year, month, tmean, td) in [(33.4, 2022, 1, 12.5, 14.0), (33.4, 2022, 7, 35.1, 12.0),
                                          (33.4, 2024, 2, 15.0, 15.5), (0.0, 2030, 3, 25.0, 10.0),
                                          (-20.0, 2041, 11, 22.0, 11.0), (45.0, 2050, 12, -5.0, 8.0)]:
        cases.append({"lat": lat, "year": year, "month": month, "tmean": tmean, "td": td,
                      "et0_mm": et0_month(tmean, td, lat, year, month)})
    return cases


def read_climate(name):
    rows = {}
    with open(DATA / "climate" / f"{name}.csv") as fh:
        for r in csv.DictReader(fh):
            rows[(int(r["year"]), int(r["month"]))] = {k: float(v) for k, v in r.items()}
    return rows


def annual(rows, col, year, how):
    vals = [rows[(year, m)][col] for m in range(1, 13)]
    return sum(vals) / 12 if how == "mean" else sum(vals)


def fmlm_shares_2022():
    manifest = json.loads((DATA / "manifest.json").read_text())
    crops = [c["id"] for c in manifest["crops"]]
    ref_t = manifest["fmlm"]["reference_temperature_C"]
    ref_p = manifest["fmlm"]["reference_precip_mm"]
    predictors = (["intercept"] + [f"lag_price_{c}" for c in crops] + [f"lag_yield_{c}" for c in crops] +
                  ["tmean_anomaly_C", "precip_anomaly_100mm"])
    beta = np.zeros((len(crops), len(predictors)))
    with open(DATA / "fmlm" / "coefficients.csv") as fh:
        for r in csv.DictReader(fh):
            beta[crops.index(r["crop"]), predictors.index(r["predictor"])] = float(r["beta"])
    out = {}
    for clim in ("ssp245", "ssp585"):
        rows = read_climate(clim)
        x = [1.0]
        x += [annual(rows, f"price_{c}", 2021, "mean") for c in crops]
        x += [annual(rows, f"yield_{c}", 2021, "mean") for c in crops]
        x.append(annual(rows, "tmean_C", 2022, "mean") - ref_t)
        x.append((annual(rows, "precip_mm", 2022, "sum") - ref_p) / 100)
        eta = beta @ np.array(x)
        p = np.exp(eta - eta.max())
        out[clim] = dict(zip(crops, (p / p.sum()).tolist()))
    return out


def aggregation_fixture():
    rng = random.Random(7)
    flow = [round(rng.uniform(0, 1000), 3) for _ in range(24)]
    share = [round(rng.uniform(0, 1), 4) for _ in range(24)]
    return {"flow": flow, "share": share,
            "flow_annual": [sum(flow[0:12]), sum(flow[12:24])],
            "share_annual": [sum(share[0:12]) / 12, sum(share[12:24]) / 12]}


def dispatch_fixture():
    # rank, capacity MW, capacity factor, emission t/GWh; month 2023-06 (720 h)
    plants = [{"id": "c", "rank": 3, "mw": 100.0, "cf": 1.0, "ef": 900.0},
              {"id": "h", "rank": 1, "mw": 50.0, "cf": 0.4, "ef": 0.0},
              {"id": "g", "rank": 2, "mw": 80.0, "cf": 0.9, "ef": 400.0},
              {"id": "s", "rank": 4, "mw": 300.0, "cf": 1.0, "ef": 450.0}]
    net, loss, hours = 120.0, 0.05, 720.0
    gross = net / (1 - loss)
    remaining = gross
    gen = {}
    for p in sorted(plants, key=lambda p: p["rank"]):
        g = min(p["mw"] * hours / 1000 * p["cf"], remaining)
        gen[p["id"]] = g
        remaining -= g
    return {"plants": plants, "net": net, "loss": loss, "year": 2023, "month": 6, "gross": gross,
            "generation": [gen[p["id"]] for p in plants],
            "emissions": sum(gen[p["id"]] * p["ef"] for p in plants)}


def main():
    oracles = {"hargreaves": hargreaves_cases(), "fmlm_shares_2022": fmlm_shares_2022(),
               "aggregation": aggregation_fixture(), "dispatch": dispatch_fixture()}
    (HERE / "oracles.json").write_text(json.dumps(oracles, indent=1) + "\n")


if __name__ == "__main__":
    main()
