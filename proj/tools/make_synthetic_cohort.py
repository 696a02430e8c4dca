#!/usr/bin/env python3
# Copyright 2026 The QDT Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates a synthetic cohort with the Diabetes 130-US-hospitals layout.

The column set, column order, value vocabularies and the "?" missing-value
sentinel follow the public diabetic_data.csv file, so the real dataset can be
ingested with the same schema config. Values are drawn from a fixed-seed RNG;
the readmission label is a noisy function of prior utilisation so that the
cohort carries signal an agent can find through aggregates.
"""

import argparse
import csv
import math
import random

HEADER = [
    "encounter_id", "patient_nbr", "race", "gender", "age", "weight",
    "admission_type_id", "discharge_disposition_id", "admission_source_id",
    "time_in_hospital", "payer_code", "medical_specialty",
    "num_lab_procedures", "num_procedures", "num_medications",
    "number_outpatient", "number_emergency", "number_inpatient",
    "diag_1", "diag_2", "diag_3", "number_diagnoses", "max_glu_serum",
    "A1Cresult", "metformin", "repaglinide", "nateglinide", "chlorpropamide",
    "glimepiride", "acetohexamide", "glipizide", "glyburide", "tolbutamide",
    "pioglitazone", "rosiglitazone", "acarbose", "miglitol", "troglitazone",
    "tolazamide", "examide", "citoglipton", "insulin", "glyburide-metformin",
    "glipizide-metformin", "glimepiride-pioglitazone",
    "metformin-rosiglitazone", "metformin-pioglitazone", "change",
    "diabetesMed", "readmitted",
]

MEDICATIONS = HEADER[24:47]

RACES = [("Caucasian", 75), ("AfricanAmerican", 19), ("Hispanic", 2),
         ("Asian", 1), ("Other", 1), ("?", 2)]
AGES = [("[0-10)", 1), ("[10-20)", 1), ("[20-30)", 2), ("[30-40)", 4),
        ("[40-50)", 9), ("[50-60)", 17), ("[60-70)", 22), ("[70-80)", 26),
        ("[80-90)", 17), ("[90-100)", 3)]
WEIGHTS = ["[0-25)", "[25-50)", "[50-75)", "[75-100)", "[100-125)",
           "[125-150)", "[150-175)", "[175-200)", ">200"]
PAYERS = ["MC", "MD", "HM", "UN", "BC", "SP", "CP", "SI", "DM", "CM", "CH",
          "PO", "WC", "OT", "OG", "MP"]
SPECIALTIES = ["InternalMedicine", "Emergency/Trauma", "Family/GeneralPractice",
               "Cardiology", "Surgery-General", "Nephrology", "Orthopedics",
               "Radiologist", "Pulmonology", "Psychiatry"]
DIAGS = ["250.83", "276", "648", "8", "197", "414", "428", "398", "434",
         "250.7", "157", "518", "999", "410", "682", "402", "737", "572",
         "V57", "189", "786", "427", "996", "277", "584", "V45", "403",
         "250", "780", "E888", "599", "491", "486", "715", "823"]
GLU = [("None", 94), ("Norm", 3), (">200", 2), (">300", 1)]
A1C = [("None", 83), ("Norm", 5), (">7", 4), (">8", 8)]
MED_STATES = [("No", 80), ("Steady", 15), ("Up", 3), ("Down", 2)]


def weighted(rng, table):
    total = sum(w for _, w in table)
    pick = rng.uniform(0, total)
    acc = 0.0
    for value, w in table:
        acc += w
        if pick <= acc:
            return value
    return table[-1][0]


def poisson(rng, lam):
    # Knuth's method; lam stays small here.
    limit = math.exp(-lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def make_row(rng, encounter_id, patient_nbr):
    age = weighted(rng, AGES)
    age_idx = [a for a, _ in AGES].index(age)
    time_in_hospital = min(14, max(1, int(rng.gammavariate(2.0, 2.2)) + 1))
    number_inpatient = poisson(rng, 0.65)
    number_emergency = poisson(rng, 0.2)
    number_outpatient = poisson(rng, 0.35)
    num_medications = max(1, int(rng.gauss(16 + time_in_hospital * 0.6, 7)))
    number_diagnoses = min(16, max(1, int(rng.gauss(7.4, 1.9))))
    insulin = weighted(rng, [("No", 47), ("Steady", 30), ("Up", 11), ("Down", 12)])

    logit = (-2.6 + 0.55 * number_inpatient + 0.35 * number_emergency
             + 0.05 * time_in_hospital + 0.08 * (number_diagnoses - 7)
             + 0.06 * (age_idx - 6) + (0.25 if insulin in ("Up", "Down") else 0.0))
    p30 = 1.0 / (1.0 + math.exp(-logit))
    u = rng.random()
    if u < p30:
        readmitted = "<30"
    elif u < p30 + 0.35:
        readmitted = ">30"
    else:
        readmitted = "NO"

    meds = {}
    for med in MEDICATIONS:
        if med in ("metformin", "glipizide", "glyburide", "pioglitazone",
                   "rosiglitazone", "glimepiride"):
            meds[med] = weighted(rng, MED_STATES)
        elif med in ("examide", "citoglipton"):
            meds[med] = "No"
        else:
            meds[med] = "No" if rng.random() < 0.985 else "Steady"
    meds["insulin"] = insulin
    changed = any(v in ("Up", "Down") for v in meds.values()) or rng.random() < 0.1
    on_meds = changed or any(v != "No" for v in meds.values())

    row = {
        "encounter_id": str(encounter_id),
        "patient_nbr": str(patient_nbr),
        "race": weighted(rng, RACES),
        "gender": "Female" if rng.random() < 0.54 else
                  ("Male" if rng.random() < 0.9995 else "Unknown/Invalid"),
        "age": age,
        "weight": rng.choice(WEIGHTS) if rng.random() < 0.03 else "?",
        "admission_type_id": str(weighted(rng, [(1, 53), (2, 18), (3, 18), (5, 5), (6, 5), (8, 1)])),
        "discharge_disposition_id": str(weighted(rng, [(1, 59), (3, 14), (6, 13), (18, 4), (2, 2), (22, 2), (11, 2), (5, 1), (25, 1), (4, 1), (7, 1)])),
        "admission_source_id": str(weighted(rng, [(7, 56), (1, 29), (17, 7), (4, 3), (6, 2), (2, 1), (5, 1), (3, 1)])),
        "time_in_hospital": str(time_in_hospital),
        "payer_code": rng.choice(PAYERS) if rng.random() < 0.6 else "?",
        "medical_specialty": rng.choice(SPECIALTIES) if rng.random() < 0.51 else "?",
        "num_lab_procedures": str(min(132, max(1, int(rng.gauss(43, 19))))),
        "num_procedures": str(min(6, poisson(rng, 1.3))),
        "num_medications": str(num_medications),
        "number_outpatient": str(number_outpatient),
        "number_emergency": str(number_emergency),
        "number_inpatient": str(number_inpatient),
        "diag_1": rng.choice(DIAGS),
        "diag_2": rng.choice(DIAGS) if rng.random() < 0.996 else "?",
        "diag_3": rng.choice(DIAGS) if rng.random() < 0.986 else "?",
        "number_diagnoses": str(number_diagnoses),
        "max_glu_serum": weighted(rng, GLU),
        "A1Cresult": weighted(rng, A1C),
        "change": "Ch" if changed else "No",
        "diabetesMed": "Yes" if on_meds else "No",
        "readmitted": readmitted,
    }
    row.update(meds)
    return [row[name] for name in HEADER]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=6000)
    parser.add_argument("--seed", type=int, default=130)
    parser.add_argument("--out", default="data/diabetes_synthetic.csv")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    encounter_id = 2278392
    patient_pool = []
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for _ in range(args.rows):
            encounter_id += rng.randint(1, 4000)
            if patient_pool and rng.random() < 0.25:
                patient_nbr = rng.choice(patient_pool)
            else:
                patient_nbr = rng.randint(135, 189502619)
                patient_pool.append(patient_nbr)
            writer.writerow(make_row(rng, encounter_id, patient_nbr))


if __name__ == "__main__":
    main()
