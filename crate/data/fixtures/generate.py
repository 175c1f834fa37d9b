#!/usr/bin/env python3
"""Regenerates the bundled fixtures.

sample/    eleven projects with fixed per-stage counts of identified and
           realized risks; risk texts, assessments and growth figures are
           synthetic.
vectors/   a small topical word-vector file covering every word used by the
           fixtures, the RBS and the category set.

Output is deterministic: rerunning overwrites the files with identical bytes.
"""

import csv
import hashlib
import json
import random
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent
DATA = HERE.parent

# id, type, jurisdiction, delivery, value M$, registers,
# initial identified, initial realized, construction identified, construction realized
PROJECTS = [
    ("1", "highway", "CA", "DB", 1421, 5, 32, 31, 6, 6),
    ("2", "highway", "IA", "DBB", 1131, 4, 24, 21, 22, 22),
    ("3", "highway", "TX", "DBB", 4922, 4, 85, 72, 16, 16),
    ("4", "highway", "CA", "DBB", 1792, 4, 43, 39, 103, 68),
    ("5", "highway", "CA", "DBB", 986, 4, 19, 15, 28, 17),
    ("6", "highway", "FL", "DBB", 684, 5, 131, 24, 193, 188),
    ("7", "bridge_tunnel", "CA", "DB", 1492, 4, 65, 36, 24, 9),
    ("8", "highway", "MD", "DBB", 814, 2, 15, 9, 30, 11),
    ("9", "bridge_tunnel", "KY", "DBB", 583, 2, 15, 3, 1, 0),
    ("10", "highway", "TX", "DB", 693, 2, 15, 3, 2, 0),
    ("11", "highway", "MI", "P3", 1137, 2, 14, 4, 41, 3),
]

# Synthetic cost and time growth (percent), used only by the style comparison.
GROWTH = {
    "1": (4.1, 6.0), "2": (9.8, 12.5), "3": (3.2, 5.1), "4": (11.4, 14.0),
    "5": (8.7, 10.2), "6": (15.3, 18.9), "7": (2.5, 4.4), "8": (7.9, 9.6),
    "9": (1.8, 3.9), "10": (2.2, 2.8), "11": (12.6, 11.7),
}

TOPICS = {
    "environmental": [
        "Environmental permit delays for wetland mitigation",
        "Hazardous materials found during excavation",
        "Contaminated soil disposal costs",
        "Endangered species habitat restrictions",
        "Stormwater quality requirements change",
        "Noise wall requirements from environmental review",
    ],
    "structure and geotechnical": [
        "Unexpected geotechnical conditions at bridge foundations",
        "Pile driving difficulties in soft soil",
        "Changes to geotechnical design for foundations",
        "Retaining wall settlement",
        "Bridge deck structural deficiencies",
        "Differing subsurface soil conditions",
    ],
    "design": [
        "Design changes after plan approval",
        "Incomplete design plans and specifications",
        "Design exception approval delays",
        "Scope changes during final design",
        "Errors in design drawings",
    ],
    "right of way": [
        "Right of way acquisition delays",
        "Additional right of way required",
        "Property owner relocation disputes",
        "Parcel condemnation proceedings",
        "Right of way acquisition issues",
    ],
    "utilities": [
        "Utility relocation may not happen on time",
        "Utility relocation at overcrossings",
        "Unknown underground utilities conflicts",
        "Utility company coordination delays",
        "Relocation of utilities",
    ],
    "railroad": [
        "Railroad agreement delays",
        "Railroad flagging and track protection costs",
        "Railroad crossing coordination",
    ],
    "partnerships and stakeholders": [
        "Local agency opposition to interchange",
        "Public opposition to project alignment",
        "Stakeholder agreement on aesthetics",
        "Third party coordination with city",
    ],
    "management and funding": [
        "Funding shortfall for later phases",
        "Federal funding approval delays",
        "Staff turnover in project management",
        "Budget cuts from legislature",
        "Inflation of construction costs",
    ],
    "contracting and procurement": [
        "Bid prices higher than estimate",
        "Contractor claims for delays",
        "Procurement protest by bidder",
        "Limited number of qualified bidders",
    ],
    "construction": [
        "Traffic control staging conflicts",
        "Material price escalation for steel",
        "Weather delays during paving",
        "Construction impacts due to lack of right of way and timely utility relocation",
        "Work zone safety incidents",
        "Construction accidents",
        "Labor shortage for skilled trades",
    ],
}

# Extra words that carry topic meaning wherever they appear.
TOPIC_WORDS = {
    "environmental": "environmental environment permit permits permitting wetland wetlands mitigation hazardous materials "
    "contaminated contamination disposal endangered species habitat stormwater water quality noise nepa "
    "review documentation archaeological cultural historic air emissions",
    "structure and geotechnical": "geotechnical foundations foundation pile piles driving soil soils settlement bridge bridges "
    "deck structural structures structure subsurface retaining wall excavation tunnel tunneling "
    "seismic ground",
    "design": "design designs plans plan specifications drawings exception exceptions scope approval errors "
    "engineering standards",
    "right of way": "right way acquisition property owner owners parcel parcels condemnation real estate land",
    "utilities": "utility utilities underground relocation relocations overcrossings company",
    "railroad": "railroad railroads rail track flagging crossing",
    "partnerships and stakeholders": "local agency agencies opposition public stakeholder stakeholders aesthetics "
    "third party city community political coordination agreement agreements",
    "management and funding": "funding fund funds shortfall federal budget legislature inflation staff turnover "
    "management financial finance cost costs revenue",
    "contracting and procurement": "bid bids bidder bidders prices estimate contractor contractors claims claim "
    "procurement protest qualified contract contracting",
    "construction": "construction traffic control staging material price escalation steel weather paving work "
    "zone safety incidents accidents labor shortage skilled trades equipment schedule quantities "
    "toll tolls growth",
}

DIM = 16
TOPIC_NAMES = list(TOPICS)


def tokens(text):
    return [t for t in re.split(r"[^0-9A-Za-z]+", text.lower()) if t]


def unit_noise(word, scale):
    """Deterministic pseudo-random noise keyed by the word itself."""
    h = hashlib.sha256(word.encode()).digest()
    return [((b / 255.0) - 0.5) * 2 * scale for b in h[:DIM]]


def word_vector(word, topic_of):
    v = unit_noise(word, 0.15)
    t = topic_of.get(word)
    if t is None:
        # generic words spread over the last six axes only
        v = [x * 0.4 for x in v]
        v[10 + int(hashlib.sha256(word.encode()).hexdigest(), 16) % 6] += 0.6
    else:
        v[TOPIC_NAMES.index(t)] += 1.0
    return v


def write_vectors(extra_texts):
    topic_of = {}
    for topic, words in TOPIC_WORDS.items():
        for w in words.split():
            topic_of.setdefault(w, topic)
    stop = set((DATA / "stopwords_en.txt").read_text().split())
    vocab = set(topic_of)
    for text in extra_texts:
        vocab.update(t for t in tokens(text) if t not in stop)
    out = HERE / "vectors" / "words.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="\n") as f:
        f.write(f"{len(vocab)} {DIM}\n")
        for w in sorted(vocab):
            vec = word_vector(w, topic_of)
            f.write(w + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


def phrase_pool():
    pool = []
    for topic, phrases in TOPICS.items():
        for p in phrases:
            pool.append((topic, p))
    return pool


VARIANTS = ["", " on north segment", " at main interchange", " near river crossing", " in phase 2"]


def risk_row(rng, rid, topic, text, state, value):
    if state == "Hap":
        prob = rng.choice([0.9, 0.95, 1.0])
        cost = round(value * rng.uniform(0.002, 0.03), 2)
        sched = rng.choice([1, 2, 4, 8])
    elif state == "Clo":
        prob, cost, sched = rng.choice([0.05, 0.1]), 0, 0
    else:
        prob = rng.choice([0.1, 0.2, 0.3, 0.5, 0.6])
        cost = round(value * rng.uniform(0.0005, 0.02), 2)
        sched = rng.choice([0, 1, 2, 3, 6])
    return {
        "risk_id": rid,
        "name": text,
        "description": f"{text.lower()} could affect cost or schedule",
        "category": topic,
        "probability": f"{prob:g}",
        "cost_impact": f"{cost:g}",
        "schedule_impact": f"{sched:g}",
        "status": state,
    }


def build_project(spec, pool):
    pid, ptype, juris, delivery, value, regs, n_init, r_init, n_con, r_con = spec
    rng = random.Random(f"project-{pid}")
    last = regs - 1
    # paths[risk] = list of (ordinal, state); absent ordinals mean "not listed"
    risks = []

    for k in range(n_init):
        rid = f"P{pid}-I{k + 1:03d}"
        realized = k < r_init
        if realized:
            start = "Hap" if k % 5 == 0 else "Reg"
            hap_at = 0 if start == "Hap" else 1
            path = {0: start}
            for o in range(max(1, hap_at), regs):
                path[o] = "Hap"
            if k % 3 == 1 and hap_at + 1 <= last:
                path[hap_at + 1] = "Clo"
                for o in range(hap_at + 2, regs):
                    path.pop(o, None)
        else:
            path = {o: "Reg" for o in range(regs)}
            if k % 2 == 0:
                path[1] = "Clo"
                for o in range(2, regs):
                    path.pop(o, None)
        risks.append((rid, path))

    for k in range(n_con):
        rid = f"P{pid}-C{k + 1:03d}"
        first = 1 + k % last if last >= 1 else 1
        realized = k < r_con
        path = {}
        if realized:
            if k % 2 == 0 or first == last:
                path[first] = "Hap"
            else:
                path[first] = "Reg"
                path[first + 1] = "Hap"
            for o in range(max(path) + 1, regs):
                path[o] = "Hap"
        else:
            for o in range(first, regs):
                path[o] = "Reg"
            if k % 2 == 1 and first < last:
                path[first + 1] = "Clo"
                for o in range(first + 2, regs):
                    path.pop(o, None)
        risks.append((rid, path))

    texts = {}
    for rid, _ in risks:
        topic, phrase = rng.choice(pool)
        texts[rid] = (topic, phrase + rng.choice(VARIANTS))

    rows_by_ordinal = {o: [] for o in range(regs)}
    states = []
    for rid, path in risks:
        topic, text = texts[rid]
        for o in sorted(path):
            rows_by_ordinal[o].append(risk_row(rng, rid, topic, text, path[o], value))
            states.append((pid, rid, o, path[o]))

    pdir = HERE / "sample" / "registers"
    pdir.mkdir(parents=True, exist_ok=True)
    registers = []
    for o in range(regs):
        name = f"p{pid}_r{o}.csv"
        with (pdir / name).open("w", newline="") as f:
            w = csv.DictWriter(
                f,
                fieldnames=["risk_id", "name", "description", "category", "probability",
                            "cost_impact", "schedule_impact", "status"],
                lineterminator="\n",
            )
            w.writeheader()
            w.writerows(rows_by_ordinal[o])
        registers.append({"ordinal": o, "label": f"update {o + 1}", "path": f"registers/{name}"})

    entry = {
        "id": pid,
        "project_type": ptype,
        "jurisdiction": juris,
        "delivery_method": delivery,
        "contract_value_musd": value,
        "registers": registers,
    }
    return entry, states


def write_holdout(pool):
    rng = random.Random("holdout")
    rows = []
    for k in range(12):
        topic, phrase = rng.choice(pool)
        rows.append(risk_row(rng, f"H{k + 1:02d}", topic, phrase, "Reg", 900))
    rows.append(risk_row(rng, "H13", "construction", "Zxqv blorf wibble", "Reg", 900))
    with (HERE / "sample" / "holdout.csv").open("w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def main():
    pool = phrase_pool()
    manifest = {"projects": []}
    states = []
    for spec in PROJECTS:
        entry, s = build_project(spec, pool)
        manifest["projects"].append(entry)
        states.extend(s)
    out = HERE / "sample"
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    with (out / "states.csv").open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["project_id", "risk_id", "snapshot", "state"])
        w.writerows(states)
    with (out / "growth.csv").open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["project_id", "cost_growth", "time_growth"])
        for pid, (c, t) in GROWTH.items():
            w.writerow([pid, c, t])
    write_holdout(pool)

    rbs = json.loads((DATA / "rbs.json").read_text())
    cats = json.loads((DATA / "categories_wsdot.json").read_text())
    texts = [p for _, p in pool] + [v for v in VARIANTS]
    texts += [i["text"] for c in rbs["categories"] for i in c["items"]]
    texts += [c["name"] for c in rbs["categories"]]
    texts += [c["label"] + " " + c["description"] for c in cats["categories"]]
    texts += ["could affect cost or schedule"]
    write_vectors(texts)


if __name__ == "__main__":
    main()
