"""Deterministic synthetic corpus: 5 materials x 36 months plus context fixtures.

``generate_corpus(out_dir)`` writes every input a pipeline run needs. The
bundled copy under ``semxai/data/fixture`` was produced with the defaults.
"""

from __future__ import annotations

import calendar
import json
from pathlib import Path

import numpy as np

from .recommender.embeddings import EmbeddingTable, save_embeddings
from .text import default_noun_lexicon, default_stopwords, is_alpha, tokenize
from .timeutil import Month, month_range

MATERIALS = ("M1", "M2", "M3", "M4", "M5")
FIRST_MONTH = Month(2017, 7)
LAST_MONTH = Month(2020, 6)
INDICATOR_START = Month(2016, 1)
EVENT_START = Month(2018, 1)
REGION = "EU"
DIM = 50

COUNTRIES = ("Germany", "France", "Italy", "Spain", "Poland", "Sweden", "Austria", "Belgium",
             "Czechia", "Portugal", "Slovenia", "Hungary")
SOURCES = ("Euro Business Wire", "Continental Auto Journal", "Market Pulse Daily", "Labour Market Review")

# Each template set: (title, body). Bodies embed the literal query phrases.
AUTO = (
    ("New car sales climb in {country} as dealers clear stock",
     "Dealers in {country} reported that new car sales rose {pct} percent in {mname}. "
     "Analysts said car demand stayed firm while the automotive industry still faces chip shortages."),
    ("Vehicle sales slow in {country} amid supply shortage",
     "Vehicle sales in {country} fell {pct} percent as a semiconductor shortage hit production. "
     "The automotive industry expects car demand to recover once supplier output improves."),
    ("Electric models lift car sales demand across {country}",
     "Car sales demand for electric and hybrid models jumped {pct} percent in {country}. "
     "Manufacturers said battery supply and charging infrastructure remain the main constraints on vehicle sales."),
    ("Registrations of passenger cars edge higher in {country}",
     "Passenger car registrations in {country} grew {pct} percent, according to the dealer association. "
     "Fleet buyers drove new car sales while consumer confidence weighed on private car demand."),
)
ECON = (
    ("Lenders trim global GDP projection for the coming year",
     "Economists lowered the global GDP projection by {pct} points, citing trade tariffs. "
     "The global economic outlook for exporters in {country} weakened, hurting business investment."),
    ("Global economic outlook brightens on trade agreement in {country}",
     "The global economic outlook improved after a trade agreement, economists said. "
     "The latest economic forecast sees GDP growth of {pct} percent in {country}."),
    ("Central bank publishes economic forecast for {country}",
     "The economic forecast for {country} projects growth near {pct} percent. "
     "Interest rate policy and inflation remain key risks to the recovery."),
)
LABOUR = (
    ("Unemployment rate falls to record low in {country}",
     "The unemployment rate in {country} dropped to {pct} percent in {mname}. "
     "Employment growth was strongest in manufacturing and services, the labour report showed."),
    ("Unemployment numbers rise as factories cut shifts in {country}",
     "Official unemployment numbers in {country} increased by {pct} percent. "
     "Long-term unemployment remains a concern for the government, the unemployment report said."),
    ("Number of people in work surges again in {country}",
     "The number of people in work reached a new record, the unemployment report showed. "
     "Employment growth of {pct} percent lifted household spending and wage growth."),
)
PMI = (
    ("Purchase managers' index signals factory expansion in {country}",
     "The purchase managers' index for {country} rose to {level} in {mname}, signalling expansion. "
     "New orders and output improved as suppliers shortened delivery times."),
    ("Factory activity contracts as purchase managers' index slips",
     "The purchase managers' index for manufacturing in {country} fell to {level}. "
     "Order backlogs shrank and export demand weakened across the sector."),
)
OTHER = (
    ("Storm causes flooding across coastal towns of {country}",
     "Heavy rain and wind caused floods in coastal towns of {country}, with road traffic disrupted for days."),
    ("Film festival in {country} draws record crowds",
     "The film festival attracted visitors from across the region, boosting hotel bookings and tourism."),
    ("Ozone pollution rises in cities of {country} during heatwave",
     "Air quality agencies in {country} warned that ozone pollution exceeded limits as traffic emissions reacted with sunlight."),
    ("Wireless charging research attracts investment in {country}",
     "Researchers in {country} secured funding for wireless charging technology aimed at electric vehicle fleets."),
)

DATASET_TOPICS = {
    "auto": [
        ("Passenger car registrations by country", "Monthly new passenger car registrations by country and fuel type."),
        ("Motor vehicle production statistics", "Production of motor vehicles and vehicle components by manufacturer country."),
        ("Electric vehicle charging infrastructure", "Number of public charging points for electric vehicles by region."),
        ("New vehicle sales by segment", "Vehicle sales volumes for cars, vans and trucks by market segment."),
        ("Automotive industry trade flows", "Exports and imports of cars and automotive parts between member states."),
        ("Fleet composition of road vehicles", "Stock of road vehicles by age, fuel and vehicle category."),
    ],
    "econ": [
        ("Gross domestic product main aggregates", "Quarterly GDP and main components at current prices by country."),
        ("Economic forecast of the commission", "Forecast of GDP growth, inflation and investment for member states."),
        ("Business investment indicators", "Gross fixed capital formation and investment rate of non-financial corporations."),
        ("Harmonised index of consumer prices", "Monthly inflation rate measured by the consumer price index."),
        ("Household consumption expenditure", "Final consumption spending of households by purpose."),
    ],
    "labour": [
        ("Unemployment rate by sex and age", "Monthly unemployment rate and unemployment numbers by sex and age group."),
        ("Employment growth in manufacturing", "Employment and hours worked in the manufacturing sector by country."),
        ("Long-term unemployment statistics", "Share of long-term unemployment in the labour force by region."),
        ("Labour cost index", "Quarterly labour cost index covering wages and salaries."),
    ],
    "pmi": [
        ("Industrial production index", "Monthly index of industrial production output for manufacturing."),
        ("Business survey of purchase managers", "Survey results on new orders, output and supplier delivery times."),
        ("Industrial new orders index", "Index of new orders received by manufacturing industry."),
    ],
    "other": [
        ("Ozone concentration in urban areas", "Annual ozone concentration and air quality measurements in cities."),
        ("Fish catches in the north east atlantic", "Catches of fish by species and fishing area."),
        ("Museum visitors by region", "Number of museum visitors and cultural tourism statistics."),
        ("Crop production in agriculture", "Harvested production of crops and farmer income by region."),
        ("Hospital beds by type of care", "Number of hospital beds and health infrastructure by region."),
        ("Renewable energy share in electricity", "Share of solar and wind power in electricity production."),
        ("Rail freight transport", "Freight transport by rail in tonnes and kilometres."),
        ("Tourist arrivals at hotels", "Arrivals and nights spent by tourists in hotels."),
    ],
}
REGIONS_DS = ("", " in member states", " by region", " monthly data", " annual data", " for the euro area",
              " by country", " detailed breakdown", " time series", " historical data", " nuts regions",
              " seasonally adjusted", " experimental statistics", " provisional data", " long series",
              " summary tables", " key indicators")

TOPIC_WORDS = {
    "auto": "car cars vehicle vehicles sale sales demand automotive industry dealer dealers dealership registration "
            "registrations passenger fleet truck van model models brand manufacturer manufacturers electric hybrid "
            "battery charging motor buyer buyers",
    "econ": "gdp economic economy outlook forecast projection growth global recession recovery investment "
            "inflation interest bank price prices consumer consumption expenditure trade tariff tariffs agreement",
    "labour": "unemployment employment job jobs work worker workers labour wage wages salaries people number "
              "numbers household report record force",
    "pmi": "purchase managers index factory factories manufacturing output order orders backlog backlogs supplier "
           "suppliers delivery industrial production survey expansion activity",
}


def _working_days(month: Month) -> int:
    _, ndays = calendar.monthrange(month.year, month.month)
    return sum(1 for d in range(1, ndays + 1) if calendar.weekday(month.year, month.month, d) < 5)


def _indicators(rng, months):
    n = len(months)
    t = np.arange(n)
    gdp = 100 + 0.15 * t + 1.5 * np.sin(2 * np.pi * t / 30) + rng.normal(0, 0.3, n)
    pmi = 51 + 3 * np.sin(2 * np.pi * t / 20 + 1.0) + rng.normal(0, 0.8, n)
    ue = 7.5 - 0.03 * t + 0.4 * np.sin(2 * np.pi * t / 24) + rng.normal(0, 0.1, n)
    return {"GDP": gdp, "PMI": pmi, "UE": ue}


def _events(rng):
    events = []
    counter = 0
    for month in month_range(EVENT_START, LAST_MONTH):
        _, ndays = calendar.monthrange(month.year, month.month)
        plan = [(AUTO, 4), (ECON, 2), (LABOUR, 2), (PMI, 1), (OTHER, 2)]
        for templates, count in plan:
            for _ in range(count):
                title, body = templates[int(rng.integers(len(templates)))]
                fill = {
                    "country": COUNTRIES[int(rng.integers(len(COUNTRIES)))],
                    "pct": f"{rng.uniform(0.5, 9.5):.1f}",
                    "level": f"{rng.uniform(44, 58):.1f}",
                    "mname": calendar.month_name[month.month],
                }
                counter += 1
                day = int(rng.integers(1, ndays + 1))
                events.append({
                    "id": f"EV{counter:05d}",
                    "date": f"{month}-{day:02d}",
                    "title": title.format(**fill),
                    "body": body.format(**fill),
                    "source": SOURCES[int(rng.integers(len(SOURCES)))],
                })
    events.sort(key=lambda e: (e["date"], e["id"]))
    return events


def _datasets(rng):
    entries = []
    n = 0
    for suffix in REGIONS_DS:
        for topic in ("auto", "econ", "labour", "pmi", "other"):
            for title, desc in DATASET_TOPICS[topic]:
                if len(entries) >= 100:
                    return entries
                if suffix and rng.random() < 0.45:
                    continue
                n += 1
                entries.append({
                    "id": f"DS{n:04d}",
                    "title": (title + suffix).strip(),
                    "description": desc,
                    "publisher": "EU statistics office" if topic != "other" else "EU environment agency",
                    "uri": f"https://data.example.eu/dataset/ds{n:04d}",
                })
    return entries


def _embeddings(rng, texts) -> EmbeddingTable:
    stop = default_stopwords()
    vocab = set(default_noun_lexicon())
    for t in texts:
        vocab.update(tok for tok in tokenize(t) if is_alpha(tok) and tok not in stop)
    topic_of = {}
    for topic, words in TOPIC_WORDS.items():
        for w in words.split():
            topic_of.setdefault(w, topic)
    centroids = {topic: rng.normal(0, 1, DIM) for topic in TOPIC_WORDS}
    vectors = {}
    for word in sorted(vocab):
        noise = rng.normal(0, 0.45, DIM)
        base = centroids[topic_of[word]] if word in topic_of else rng.normal(0, 1, DIM)
        vectors[word] = (base + noise).astype("<f4")
    return EmbeddingTable(DIM, vectors)


def generate_corpus(out_dir, seed: int = 7) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    ind_months = month_range(INDICATOR_START, LAST_MONTH)
    ind = _indicators(rng, ind_months)
    with open(out / "indicators.csv", "w", encoding="utf-8") as fh:
        fh.write("indicator,region,month,value\n")
        for name in ("GDP", "PMI", "UE"):
            for m, v in zip(ind_months, ind[name]):
                fh.write(f"{name},{REGION},{m},{v:.3f}\n")
    with open(out / "working_days.csv", "w", encoding="utf-8") as fh:
        fh.write("month,count\n")
        for m in ind_months:
            fh.write(f"{m},{_working_days(m)}\n")

    pmi_by_month = dict(zip(ind_months, ind["PMI"]))
    ue_by_month = dict(zip(ind_months, ind["UE"]))
    demand_rows, plan_rows = [], []
    for mat in MATERIALS:
        base = rng.uniform(150, 600)
        phase = rng.uniform(0, 2 * np.pi)
        trend = rng.uniform(-0.004, 0.008)
        for i, m in enumerate(month_range(FIRST_MONTH, LAST_MONTH)):
            season = 1 + 0.15 * np.sin(2 * np.pi * m.month / 12 + phase)
            macro = 1 + 0.02 * (pmi_by_month[m - 3] - 51) - 0.03 * (ue_by_month[m - 3] - 7.0)
            qty = base * (1 + trend * i) * season * macro * rng.lognormal(0, 0.05)
            qty = max(0, int(round(qty)))
            planned = max(0, int(round(qty * rng.normal(1.0, 0.06))))
            demand_rows.append(f"{mat},{m},{qty}")
            plan_rows.append(f"{mat},{m},{planned}")
    (out / "demand.csv").write_text("material_id,month,quantity\n" + "\n".join(demand_rows) + "\n")
    (out / "plan.csv").write_text("material_id,month,planned_qty\n" + "\n".join(plan_rows) + "\n")

    events = _events(rng)
    (out / "events.jsonl").write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in events))
    datasets = _datasets(rng)
    (out / "datasets.jsonl").write_text("".join(json.dumps(d, sort_keys=True) + "\n" for d in datasets))

    texts = [e["title"] + " " + e["body"] for e in events] + [d["title"] + " " + d["description"] for d in datasets]
    texts += [w for words in TOPIC_WORDS.values() for w in words.split()]
    save_embeddings(_embeddings(rng, texts), out / "embeddings.bin")
    return out
