#!/usr/bin/env python3
"""Generate the bundled synthetic study-area dataset (data/study_area).

Everything is seeded; rerunning reproduces the files byte for byte. The history
panel is drawn from a known coefficient matrix, and fmlm/coefficients.csv starts
out as that matrix. `fewsim fit-fmlm --out data/study_area/fmlm/coefficients.csv`
replaces it with coefficients fitted to the panel.
"""

import argparse
import csv
import json
from pathlib import Path

import numpy as np

HIST_START = 1990
START, END = 2022, 2050

CROPS = [
    ("alfalfa", "Alfalfa hay", 17.0, [0.80, 0.90, 0.95, 1.00, 1.00, 1.00, 0.95, 0.95, 0.95, 0.90, 0.85, 0.80]),
    ("barley", "Barley", 6.0, [0.75, 1.10, 1.15, 0.60, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.30, 0.45]),
    ("cotton", "Upland cotton", 4.2, [0.0, 0.0, 0.0, 0.35, 0.70, 1.05, 1.20, 1.15, 0.85, 0.50, 0.0, 0.0]),
    ("corn", "Corn", 22.0, [0.0, 0.0, 0.30, 0.55, 0.95, 1.15, 1.10, 0.70, 0.0, 0.0, 0.0, 0.0]),
    ("durum_wheat", "Spring durum wheat", 6.7, [0.80, 1.10, 1.15, 0.75, 0.30, 0.0, 0.0, 0.0, 0.0, 0.0, 0.35, 0.50]),
    ("vegetables", "Vegetables", 28.0, [0.95, 1.00, 0.95, 0.80, 0.0, 0.0, 0.0, 0.0, 0.45, 0.85, 0.95, 0.95]),
]
CROP_IDS = [c[0] for c in CROPS]

TMEAN_NORMAL = [13.5, 15.3, 18.6, 22.6, 27.5, 32.7, 35.0, 34.3, 31.3, 24.8, 17.9, 12.9]
PRECIP_NORMAL = [23.0, 21.0, 25.0, 7.0, 3.0, 1.0, 24.0, 25.0, 17.0, 15.0, 16.0, 23.0]
DIURNAL = [14.0, 14.5, 15.5, 16.5, 17.0, 17.0, 13.0, 13.0, 14.0, 15.5, 15.0, 14.0]
SRP_SEASON = [0.85, 0.95, 1.20, 1.25, 1.20, 1.10, 1.05, 1.00, 0.95, 0.85, 0.80, 0.80]
CAP_SEASON = [0.80, 0.85, 0.95, 1.05, 1.15, 1.20, 1.20, 1.15, 1.05, 0.95, 0.85, 0.80]
MUNI_SEASON = [0.78, 0.78, 0.88, 1.00, 1.15, 1.25, 1.25, 1.20, 1.12, 1.00, 0.85, 0.74]
IND_SEASON = [0.95, 0.95, 0.98, 1.00, 1.03, 1.06, 1.06, 1.06, 1.03, 1.00, 0.95, 0.93]
OTHER_IRR_SEASON = [0.45, 0.55, 0.80, 1.05, 1.30, 1.45, 1.50, 1.40, 1.20, 0.95, 0.70, 0.65]

PREDICTORS = (["intercept"] + [f"lag_price_{c}" for c in CROP_IDS] + [f"lag_yield_{c}" for c in CROP_IDS]
              + ["tmean_anomaly_C", "precip_anomaly_100mm"])
REF_T, REF_P = 23.9, 200.0

# rows: barley, cotton, corn, durum_wheat, vegetables (alfalfa is the base)
def true_coefficients():
    k = len(PREDICTORS)
    b = np.zeros((5, k))
    b[:, 0] = [-1.55, -1.10, -1.85, -1.45, -0.25]
    own = [0.9, 1.1, 0.8, 0.9, 0.7]
    for r in range(5):
        b[r, 1 + r + 1] = own[r]                  # own lagged price
        b[r, 1] = -0.6                            # alfalfa price pulls land to alfalfa
        b[r, 7 + r + 1] = 0.4                     # own lagged yield
    b[:, 13] = [0.05, 0.12, -0.10, 0.02, -0.08]   # warm years favour cotton
    b[:, 14] = [0.10, -0.05, 0.05, 0.12, 0.03]
    return b


def softmax_base(b, x):
    eta = np.concatenate([[0.0], b @ x])
    e = np.exp(eta - eta.max())
    return e / e.sum()


def months(first_year, last_year):
    return [(y, m) for y in range(first_year, last_year + 1) for m in range(1, 13)]


def climate_file(name, rng, common):
    """Monthly forcing from HIST_START to END. The history block is shared by both pathways."""
    warming = {"ssp245": 0.030, "ssp585": 0.055}[name]
    drying = {"ssp245": 0.000, "ssp585": 0.004}[name]
    pop_growth = {"ssp245": 0.0125, "ssp585": 0.0150}[name]
    cap_decline = {"ssp245": 0.003, "ssp585": 0.008}[name]
    rows = []
    for i, (y, m) in enumerate(months(HIST_START, END)):
        if y < START:
            rows.append(common[i])
            continue
        h = common_month_state(common, y, m)
        t = TMEAN_NORMAL[m - 1] + 0.02 * (START - HIST_START) + warming * (y - START) + rng.normal(0, 0.8)
        p = max(0.0, PRECIP_NORMAL[m - 1] * (1 - drying * (y - START)) * rng.gamma(2.0, 0.5))
        pop = 4.95e6 * (1 + pop_growth) ** (y - START + (m - 1) / 12)
        wet = 0.85 + 0.15 * p / max(PRECIP_NORMAL[m - 1], 1.0)
        srp = 6.0e7 * SRP_SEASON[m - 1] * wet * rng.lognormal(0, 0.08)
        cap = 4.6e7 * CAP_SEASON[m - 1] * (1 - cap_decline) ** (y - START) * rng.lognormal(0, 0.04)
        row = {"year": y, "month": m, "tmean_C": t, "precip_mm": p, "population": pop,
               "srp_flow_m3": srp, "cap_flow_m3": cap}
        for c in CROP_IDS:
            row[f"price_{c}"] = h[f"price_{c}"] * (1 + 0.004 * (y - START)) * rng.lognormal(0, 0.03)
            heat = max(0.0, t - TMEAN_NORMAL[m - 1] - 1.0)
            row[f"yield_{c}"] = max(0.2, 1.0 - 0.015 * heat + rng.normal(0, 0.03))
        rows.append(row)
    return rows


def common_month_state(common, y, m):
    # Price level of the last historical December, carried into the projection.
    last = common[-1]
    return {f"price_{c}": last[f"price_{c}"] for c in CROP_IDS}


def history_block(rng):
    rows = []
    price_level = {c: 1.0 for c in CROP_IDS}
    for y, m in months(HIST_START, START - 1):
        if m == 1:
            for c in CROP_IDS:
                price_level[c] = float(np.clip(price_level[c] * rng.lognormal(0, 0.10), 0.6, 1.6))
            yield_shock = {c: rng.normal(0, 0.06) for c in CROP_IDS}
            year_t = rng.normal(0, 0.5)
        t = TMEAN_NORMAL[m - 1] + 0.02 * (y - HIST_START) + year_t + rng.normal(0, 0.6)
        p = max(0.0, PRECIP_NORMAL[m - 1] * rng.gamma(2.0, 0.5))
        pop = 2.2e6 * (4.95e6 / 2.2e6) ** ((y - HIST_START + (m - 1) / 12) / (START - HIST_START))
        wet = 0.85 + 0.15 * p / max(PRECIP_NORMAL[m - 1], 1.0)
        row = {"year": y, "month": m, "tmean_C": t, "precip_mm": p, "population": pop,
               "srp_flow_m3": 6.0e7 * SRP_SEASON[m - 1] * wet * rng.lognormal(0, 0.08),
               "cap_flow_m3": 4.6e7 * CAP_SEASON[m - 1] * rng.lognormal(0, 0.04)}
        for c in CROP_IDS:
            row[f"price_{c}"] = price_level[c] * rng.lognormal(0, 0.02)
            row[f"yield_{c}"] = max(0.2, 1.0 + yield_shock[c] + rng.normal(0, 0.02))
        rows.append(row)
    return rows


def annual(rows, col, year, how):
    vals = [r[col] for r in rows if r["year"] == year]
    assert len(vals) == 12
    return sum(vals) / 12 if how == "mean" else sum(vals)


def predictors(rows, year):
    x = [1.0]
    x += [annual(rows, f"price_{c}", year - 1, "mean") for c in CROP_IDS]
    x += [annual(rows, f"yield_{c}", year - 1, "mean") for c in CROP_IDS]
    x.append(annual(rows, "tmean_C", year, "mean") - REF_T)
    x.append((annual(rows, "precip_mm", year, "sum") - REF_P) / 100.0)
    return np.array(x)


DISTRICTS = [
    # id, label, cropland ha, trend/yr, priority, sources, efficiency
    ("salt_river_valley", "Salt River Valley", 9500, -0.012, ["SRP", "GW"], 0.72),
    ("roosevelt_wcd", "Roosevelt WCD", 11000, -0.008, ["CAP", "GW"], 0.75),
    ("buckeye", "Buckeye WCDD", 8200, -0.005, ["SRP", "WWTP", "GW"], 0.70),
    ("new_magma", "New Magma IDD", 7200, -0.004, ["CAP", "GW"], 0.78),
    ("queen_creek", "Queen Creek ID", 3600, -0.020, ["CAP", "GW"], 0.74),
    ("chandler_heights", "Chandler Heights Citrus ID", 1400, -0.025, ["SRP", "GW"], 0.80),
    ("san_tan", "San Tan ID", 1700, -0.018, ["CAP", "GW"], 0.76),
    ("maricopa_water", "Maricopa Water District", 9800, -0.006, ["CAP", "WWTP", "GW"], 0.71),
    ("adaman", "Adaman MWC", 2300, -0.010, ["SRP", "GW"], 0.73),
    ("roosevelt_id", "Roosevelt ID", 6900, -0.007, ["WWTP", "SRP", "GW"], 0.72),
    ("st_johns", "St. Johns ID", 1200, -0.010, ["CAP", "GW"], 0.75),
    ("tonopah", "Tonopah ID", 6100, -0.003, ["CAP", "GW"], 0.77),
]


def plants():
    out = []

    def add(pid, label, in_area, fuel, mw, cf, em, water):
        out.append({"id": pid, "label": label, "in_area": in_area, "fuel": fuel, "capacity_MW": mw,
                    "capacity_factor": cf, "merit_rank": 0, "emission_factor_t_per_GWh": em,
                    "water_factor_m3_per_GWh": water})

    # in area (9)
    add("palo_verde", "Palo Verde", True, "uranium", 3937, 0.92, 0.0, 2700.0)
    add("gila_river", "Gila River", True, "natural_gas", 2200, 0.90, 390.0, 720.0)
    add("redhawk", "Redhawk", True, "natural_gas", 1060, 0.90, 380.0, 700.0)
    add("mesquite", "Mesquite", True, "natural_gas", 1250, 0.90, 385.0, 710.0)
    add("santan", "Santan", True, "natural_gas", 1200, 0.88, 395.0, 740.0)
    add("arlington", "Arlington Valley", True, "natural_gas", 580, 0.88, 400.0, 760.0)
    add("west_phoenix", "West Phoenix", True, "natural_gas", 1000, 0.85, 430.0, 800.0)
    add("ocotillo", "Ocotillo", True, "natural_gas", 850, 0.80, 520.0, 150.0)
    add("solar_valley", "Valley solar fleet", True, "solar", 1400, 0.28, 0.0, 20.0)
    # out of area (27)
    add("hoover_share", "Hoover share", False, "hydro", 650, 0.40, 0.0, 0.0)
    add("glen_canyon_share", "Glen Canyon share", False, "hydro", 700, 0.40, 0.0, 0.0)
    add("roosevelt_hydro", "Salt River hydro", False, "hydro", 260, 0.35, 0.0, 0.0)
    for i, mw in enumerate([300, 250, 250, 200, 200, 180, 150, 150], 1):
        add(f"solar_out_{i}", f"Solar {i}", False, "solar", mw, 0.29, 0.0, 0.0)
    for i, mw in enumerate([250, 200, 200, 150, 150, 100], 1):
        add(f"wind_{i}", f"Wind {i}", False, "wind", mw, 0.35, 0.0, 0.0)
    add("four_corners", "Four Corners", False, "coal", 1540, 0.80, 1020.0, 0.0)
    add("springerville", "Springerville", False, "coal", 1600, 0.80, 990.0, 0.0)
    add("coronado", "Coronado", False, "coal", 800, 0.78, 1050.0, 0.0)
    add("cholla", "Cholla", False, "coal", 400, 0.75, 1080.0, 0.0)
    add("harquahala", "Harquahala", False, "natural_gas", 1100, 0.90, 385.0, 0.0)
    add("sundance", "Sundance", False, "natural_gas", 450, 0.60, 560.0, 0.0)
    add("south_point", "South Point", False, "natural_gas", 550, 0.88, 395.0, 0.0)
    add("griffith", "Griffith", False, "natural_gas", 600, 0.88, 400.0, 0.0)
    add("yuma_cc", "Yuma", False, "natural_gas", 300, 0.85, 430.0, 0.0)
    add("desert_basin", "Desert Basin", False, "natural_gas", 600, 0.85, 420.0, 0.0)
    # merit order: renewables, nuclear, coal, in-area gas, imported gas
    order = {"hydro": 0, "solar": 1, "wind": 2, "uranium": 3, "coal": 4}
    def rank_key(p):
        if p["fuel"] in order:
            return (order[p["fuel"]], 0, p["id"])
        return (5 if p["in_area"] else 6, p["emission_factor_t_per_GWh"], p["id"])
    for rank, p in enumerate(sorted(out, key=rank_key), 1):
        p["merit_rank"] = rank
    return out


def write_csv(path, rows, header):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([r[h] if isinstance(r[h], int) else repr(float(r[h])) for h in header])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "study_area"))
    ap.add_argument("--seed", type=int, default=20220101)
    args = ap.parse_args()
    out = Path(args.out)
    (out / "climate").mkdir(parents=True, exist_ok=True)
    (out / "fmlm").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    history = history_block(rng)
    header = (["year", "month", "tmean_C", "precip_mm", "population", "srp_flow_m3", "cap_flow_m3"]
              + [f"price_{c}" for c in CROP_IDS] + [f"yield_{c}" for c in CROP_IDS])
    climates = {}
    for name in ("ssp245", "ssp585"):
        climates[name] = climate_file(name, np.random.default_rng([args.seed, len(name), ord(name[-1])]), history)
        write_csv(out / "climate" / f"{name}.csv", climates[name], header)

    b = true_coefficients()
    with open(out / "fmlm" / "coefficients.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["crop", "predictor", "beta"])
        for r, crop in enumerate(CROP_IDS[1:]):
            for k, pred in enumerate(PREDICTORS):
                w.writerow([crop, pred, repr(float(b[r, k]))])

    # Regional shares per year with district-level Dirichlet noise.
    panel = []
    for d in DISTRICTS:
        for y in range(HIST_START + 1, START):
            x = predictors(history, y)
            s = rng.dirichlet(400.0 * softmax_base(b, x) + 1e-3)
            row = {"district": d[0], "year": y}
            row.update({f"x_{p}": float(v) for p, v in zip(PREDICTORS, x)})
            row.update({f"s_{c}": float(v) for c, v in zip(CROP_IDS, s / s.sum())})
            panel.append(row)
    with open(out / "fmlm" / "history_shares.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        cols = ["district", "year"] + [f"x_{p}" for p in PREDICTORS] + [f"s_{c}" for c in CROP_IDS]
        w.writerow(cols)
        for r in panel:
            w.writerow([r["district"], r["year"]] + [repr(r[c]) for c in cols[2:]])

    no_cotton = [c for c in CROP_IDS if c != "cotton"]
    manifest = {
        "name": "Synthetic desert metro study area",
        "horizon": {"start": f"{START}-01", "end": f"{END}-12"},
        "crops": [{"id": c, "label": l, "base_yield_t_per_ha": y, "kc": kc} for c, l, y, kc in CROPS],
        "water": {
            "latitude_deg": 33.45,
            "diurnal_range_C": DIURNAL,
            "effective_precip_fraction": 0.7,
            "sources": [
                {"id": "SRP", "label": "Salt River Project", "kind": "surface", "availability_column": "srp_flow_m3"},
                {"id": "CAP", "label": "Central Arizona Project", "kind": "surface", "availability_column": "cap_flow_m3"},
                {"id": "GW", "label": "Groundwater", "kind": "residual"},
                {"id": "WWTP", "label": "Reclaimed water (WWTP)", "kind": "reclaimed", "return_fraction": 0.30,
                 "return_from": ["municipal", "industrial"]},
            ],
            "demands": [
                {"id": "municipal", "label": "Municipal", "sector": "municipal", "priority": 1,
                 "sources": ["SRP", "CAP", "GW"], "per_capita_m3_per_month": 12.6, "population_share": 0.97,
                 "seasonal": MUNI_SEASON},
                {"id": "native_american", "label": "Native American communities", "sector": "native_american",
                 "priority": 1, "sources": ["CAP", "SRP", "GW"], "per_capita_m3_per_month": 14.0,
                 "population_share": 0.03, "seasonal": MUNI_SEASON},
                {"id": "industrial", "label": "Industrial", "sector": "industrial", "priority": 2,
                 "sources": ["CAP", "WWTP", "GW"], "base_m3_per_month": 6.5e6, "seasonal": IND_SEASON},
                {"id": "power_plants", "label": "Power plants", "sector": "power_plants", "priority": 2,
                 "sources": ["WWTP"]},
                {"id": "other_irrigation", "label": "Other irrigation", "sector": "agricultural", "priority": 3,
                 "sources": ["GW"], "base_m3_per_month": 7.0e6, "seasonal": OTHER_IRR_SEASON},
            ],
            "districts": [
                {"id": i, "label": l, "cropland_ha": ha, "cropland_trend_per_year": tr,
                 "allowed_crops": CROP_IDS if i == "new_magma" else no_cotton,
                 "priority": 3, "sources": src, "base_efficiency": eff}
                for i, l, ha, tr, src, eff in DISTRICTS
            ],
        },
        "energy": {
            "loss_fraction": 0.05,
            "reserve_margin": 0.15,
            "load_factor": 0.55,
            "sectors": [
                {"id": "residential", "activity_column": "population", "intensity_kwh": 280.0,
                 "cooling_sensitivity_per_C": 0.06, "balance_temperature_C": 18.0},
                {"id": "commercial", "activity_column": "population", "intensity_kwh": 190.0,
                 "cooling_sensitivity_per_C": 0.03, "balance_temperature_C": 18.0},
                {"id": "industrial", "activity_column": "", "intensity_kwh": 6.0e8},
            ],
            "water_infrastructure_kwh_per_m3": {"SRP": 0.25, "CAP": 2.3, "GW": 0.9, "WWTP": 1.2},
            "plants": plants(),
        },
        "fmlm": {"coefficients": "fmlm/coefficients.csv", "history_panel": "fmlm/history_shares.csv",
                 "reference_temperature_C": REF_T, "reference_precip_mm": REF_P},
        "levers": [
            {"key": "municipal_wue", "branch": "water/demand/municipal", "label": "Municipal water use efficiency",
             "kind": "intensity", "base_value": 12.6, "min_pct": 0, "max_pct": 60},
            {"key": "household_eue", "branch": "energy/demand/residential",
             "label": "Household energy use efficiency", "kind": "intensity", "base_value": 280.0,
             "min_pct": 0, "max_pct": 60},
            {"key": "irrigation_ie", "branch": "water/demand/agriculture", "label": "Irrigation efficiency",
             "kind": "intensity", "min_pct": 0, "max_pct": 40},
            {"key": "industrial_water_use", "branch": "water/demand/industrial", "label": "Industrial water use",
             "kind": "flow", "base_value": 6.5e6, "min_pct": -50, "max_pct": 50},
            {"key": "cap_availability", "branch": "water/supply/CAP", "label": "CAP availability",
             "kind": "flow", "series_ref": "cap_flow_m3", "min_pct": -50, "max_pct": 20},
            {"key": "srp_availability", "branch": "water/supply/SRP", "label": "SRP availability",
             "kind": "flow", "series_ref": "srp_flow_m3", "min_pct": -50, "max_pct": 20},
            {"key": "wwtp_reuse", "branch": "water/supply/WWTP", "label": "Wastewater reuse",
             "kind": "share", "base_value": 0.30, "min_pct": -50, "max_pct": 100},
            {"key": "commercial_energy_intensity", "branch": "energy/demand/commercial",
             "label": "Commercial energy intensity", "kind": "intensity", "base_value": 190.0,
             "min_pct": -50, "max_pct": 50},
            {"key": "solar_capacity", "branch": "energy/supply", "label": "Solar capacity",
             "kind": "stock", "min_pct": -50, "max_pct": 300},
            {"key": "cropland_area", "branch": "food/districts", "label": "Irrigated cropland",
             "kind": "stock", "min_pct": -50, "max_pct": 20},
        ],
        "climate_files": {"ssp245": "climate/ssp245.csv", "ssp585": "climate/ssp585.csv"},
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
