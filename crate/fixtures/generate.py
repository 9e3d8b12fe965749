#!/usr/bin/env python3
"""Regenerates the checked-in fixture files.

Deterministic: running it twice produces identical output. Only the stdlib
is used so it runs anywhere.
"""

import json
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

# title, theme, description, attributes, categories, related titles
ENTITIES = [
    # bridges
    ("Brooklyn Bridge", "bridge", "hybrid cable stayed suspension bridge in New York City spanning the East River between Manhattan and Brooklyn",
     "opened 1883 main span 486 m steel wire cables granite towers", "Bridges in New York City; Suspension bridges; National Historic Landmarks",
     ["New York City", "East River", "John A. Roebling", "Manhattan Bridge"]),
    ("Manhattan Bridge", "bridge", "suspension bridge that crosses the East River connecting Lower Manhattan with Downtown Brooklyn",
     "opened 1909 main span 448 m carries subway and road traffic", "Bridges in New York City; Suspension bridges",
     ["New York City", "East River", "Brooklyn Bridge"]),
    ("Williamsburg Bridge", "bridge", "suspension bridge across the East River linking the Lower East Side of Manhattan with Williamsburg in Brooklyn",
     "opened 1903 main span 488 m steel towers", "Bridges in New York City; Suspension bridges",
     ["New York City", "East River"]),
    ("George Washington Bridge", "bridge", "double decked suspension bridge spanning the Hudson River between New York City and Fort Lee New Jersey",
     "opened 1931 main span 1067 m busiest motor vehicle bridge", "Bridges in New York City; Suspension bridges; Bridges over the Hudson River",
     ["New York City", "Hudson River"]),
    ("Golden Gate Bridge", "bridge", "suspension bridge spanning the Golden Gate strait connecting San Francisco to Marin County",
     "opened 1937 main span 1280 m international orange color art deco towers", "Suspension bridges; Bridges in San Francisco",
     ["San Francisco"]),
    ("Tower Bridge", "bridge", "combined bascule and suspension bridge in London crossing the River Thames",
     "opened 1894 victorian gothic towers bascule span", "Bridges in London; Bascule bridges",
     ["London", "River Thames"]),
    ("London Bridge", "bridge", "road bridge in London crossing the River Thames between the City of London and Southwark",
     "opened 1973 concrete box girder", "Bridges in London",
     ["London", "River Thames"]),
    ("Oberbaum Bridge", "bridge", "double deck bridge crossing the Spree river in Berlin linking Friedrichshain and Kreuzberg",
     "opened 1896 brick gothic towers carries U Bahn", "Bridges in Berlin",
     ["Berlin", "Spree"]),
    # rivers and cities
    ("East River", "city", "tidal estuary in New York City separating Manhattan from Brooklyn and Queens",
     "length 26 km salt water strait", "Rivers of New York City; Estuaries", ["New York City", "Brooklyn Bridge"]),
    ("Hudson River", "city", "river flowing from north to south through eastern New York into New York Harbor",
     "length 507 km", "Rivers of New York", ["New York City", "George Washington Bridge"]),
    ("River Thames", "city", "river that flows through southern England including London",
     "length 346 km", "Rivers of England", ["London", "Tower Bridge"]),
    ("Spree", "city", "river that flows through Saxony Brandenburg and Berlin in Germany",
     "length 400 km", "Rivers of Germany", ["Berlin"]),
    ("New York City", "city", "most populous city in the United States located at the southern tip of New York State",
     "population 8 million five boroughs Manhattan Brooklyn Queens Bronx Staten Island", "Cities in New York; Port cities",
     ["East River", "Hudson River", "Brooklyn Bridge"]),
    ("San Francisco", "city", "cultural and financial center of Northern California",
     "population 800000 hills cable cars", "Cities in California; Port cities", ["Golden Gate Bridge"]),
    ("London", "city", "capital and largest city of England and the United Kingdom on the River Thames",
     "population 9 million", "Capitals in Europe; Port cities", ["River Thames", "Tower Bridge"]),
    ("Philadelphia", "city", "largest city in the Commonwealth of Pennsylvania and sixth most populous city in the United States",
     "population 1.6 million founded 1682 by William Penn", "Cities in Pennsylvania",
     ["Philadelphia Eagles", "Philadelphia Phillies", "Philadelphia 76ers", "Philadelphia Flyers"]),
    ("Berlin", "berlin", "capital and largest city of Germany by population and area",
     "population 3.7 million governing mayor of Berlin head of the senate", "Capitals in Europe; Cities in Germany; States of Germany",
     ["Kai Wegner", "Spree", "Oberbaum Bridge"]),
    # berlin politics
    ("Kai Wegner", "berlin", "German politician serving as the Governing Mayor of Berlin since 2023",
     "party CDU office governing mayor of Berlin born 1972", "Mayors of Berlin; German politicians", ["Berlin", "Franziska Giffey"]),
    ("Franziska Giffey", "berlin", "German politician who served as Governing Mayor of Berlin from 2021 to 2023",
     "party SPD office governing mayor of Berlin born 1978", "Mayors of Berlin; German politicians", ["Berlin", "Kai Wegner", "Michael Mueller"]),
    ("Michael Mueller", "berlin", "German politician who was Governing Mayor of Berlin from 2014 to 2021",
     "party SPD office governing mayor born 1964", "Mayors of Berlin; German politicians", ["Berlin", "Klaus Wowereit"]),
    ("Klaus Wowereit", "berlin", "German politician who was Governing Mayor of Berlin from 2001 to 2014",
     "party SPD office governing mayor born 1953", "Mayors of Berlin; German politicians", ["Berlin", "Michael Mueller"]),
    ("Senate of Berlin", "berlin", "executive body governing the city of Berlin led by the governing mayor",
     "seat Red City Hall", "Politics of Berlin", ["Berlin", "Kai Wegner"]),
    ("Munich", "berlin", "capital and most populous city of Bavaria in Germany",
     "population 1.5 million mayor Dieter Reiter", "Cities in Germany", ["Berlin"]),
    # physics people
    ("Albert Einstein", "physics", "German born theoretical physicist who developed the theory of relativity",
     "born 1879 Ulm died 1955 Princeton Nobel Prize in Physics 1921", "German physicists; Nobel laureates in Physics; Theoretical physicists",
     ["Theory of relativity", "Mass energy equivalence", "Quantum mechanics", "Max Planck"]),
    ("Niels Bohr", "physics", "Danish physicist who made foundational contributions to atomic structure and quantum theory",
     "born 1885 Copenhagen Nobel Prize in Physics 1922", "Danish physicists; Nobel laureates in Physics",
     ["Quantum mechanics", "Werner Heisenberg"]),
    ("Max Planck", "physics", "German theoretical physicist whose discovery of energy quanta won him the Nobel Prize in Physics",
     "born 1858 Kiel Nobel Prize in Physics 1918 Planck constant", "German physicists; Nobel laureates in Physics; Theoretical physicists",
     ["Quantum mechanics", "Albert Einstein"]),
    ("Werner Heisenberg", "physics", "German theoretical physicist and one of the key pioneers of quantum mechanics",
     "born 1901 uncertainty principle Nobel Prize in Physics 1932", "German physicists; Nobel laureates in Physics; Theoretical physicists",
     ["Quantum mechanics", "Niels Bohr"]),
    ("Erwin Schroedinger", "physics", "Austrian physicist who developed fundamental results in quantum theory including the wave equation",
     "born 1887 Vienna Nobel Prize in Physics 1933", "Austrian physicists; Nobel laureates in Physics",
     ["Quantum mechanics"]),
    ("Marie Curie", "physics", "Polish and naturalised French physicist and chemist who conducted pioneering research on radioactivity",
     "born 1867 Warsaw Nobel Prize in Physics 1903 Nobel Prize in Chemistry 1911", "Polish physicists; Nobel laureates in Physics; Nobel laureates in Chemistry",
     ["Radioactivity"]),
    ("Isaac Newton", "physics", "English mathematician physicist and astronomer who formulated the laws of motion and universal gravitation",
     "born 1643 died 1727 Principia", "English physicists; English mathematicians", ["Classical mechanics"]),
    # physics concepts
    ("Theory of relativity", "concept", "two interrelated physics theories by Albert Einstein special relativity and general relativity",
     "proposed 1905 and 1915 spacetime gravitation", "Theories of gravitation; Albert Einstein",
     ["Albert Einstein", "Mass energy equivalence"]),
    ("Quantum mechanics", "concept", "fundamental theory in physics describing nature at the scale of atoms and subatomic particles",
     "wave function uncertainty principle", "Quantum mechanics; Physics theories",
     ["Niels Bohr", "Werner Heisenberg", "Max Planck", "Erwin Schroedinger"]),
    ("Mass energy equivalence", "concept", "relationship between mass and energy in a system rest frame expressed by the famous equation E = mc2",
     "formula E = mc2 special relativity", "Albert Einstein; Special relativity",
     ["Albert Einstein", "Theory of relativity"]),
    ("Classical mechanics", "concept", "physical theory describing the motion of macroscopic objects",
     "Newton laws of motion", "Physics theories", ["Isaac Newton"]),
    ("Radioactivity", "concept", "process by which an unstable atomic nucleus loses energy by radiation",
     "alpha beta gamma decay", "Nuclear physics", ["Marie Curie"]),
    # sports
    ("Philadelphia Eagles", "sports", "professional American football team based in Philadelphia competing in the National Football League",
     "founded 1933 stadium Lincoln Financial Field Super Bowl LII champions", "National Football League teams; Sports teams in Philadelphia",
     ["Philadelphia", "National Football League"]),
    ("Philadelphia Phillies", "sports", "professional baseball team based in Philadelphia competing in Major League Baseball",
     "founded 1883 ballpark Citizens Bank Park World Series champions 1980 2008", "Major League Baseball teams; Sports teams in Philadelphia",
     ["Philadelphia", "Major League Baseball"]),
    ("Philadelphia 76ers", "sports", "professional basketball team based in Philadelphia competing in the National Basketball Association",
     "founded 1946 arena Wells Fargo Center", "National Basketball Association teams; Sports teams in Philadelphia",
     ["Philadelphia", "National Basketball Association"]),
    ("Philadelphia Flyers", "sports", "professional ice hockey team based in Philadelphia competing in the National Hockey League",
     "founded 1967 arena Wells Fargo Center Stanley Cup 1974 1975", "National Hockey League teams; Sports teams in Philadelphia",
     ["Philadelphia", "National Hockey League"]),
    ("Philadelphia Union", "sports", "professional soccer club based in the Philadelphia area competing in Major League Soccer",
     "founded 2008 stadium Subaru Park", "Major League Soccer teams; Sports teams in Philadelphia",
     ["Philadelphia"]),
    ("New York Yankees", "sports", "professional baseball team based in the Bronx New York City competing in Major League Baseball",
     "founded 1901 Yankee Stadium 27 World Series titles", "Major League Baseball teams; Sports teams in New York City",
     ["New York City", "Major League Baseball"]),
    ("Boston Celtics", "sports", "professional basketball team based in Boston competing in the National Basketball Association",
     "founded 1946 arena TD Garden 18 championships", "National Basketball Association teams; Sports teams in Boston",
     ["National Basketball Association"]),
    ("Pittsburgh Penguins", "sports", "professional ice hockey team based in Pittsburgh competing in the National Hockey League",
     "founded 1967 Stanley Cup five titles", "National Hockey League teams; Sports teams in Pittsburgh",
     ["National Hockey League"]),
    ("National Football League", "sports", "professional American football league consisting of 32 teams",
     "founded 1920 Super Bowl", "Professional sports leagues", ["Philadelphia Eagles"]),
    ("Major League Baseball", "sports", "professional baseball organization and the oldest major professional sports league",
     "founded 1903 World Series", "Professional sports leagues", ["New York Yankees", "Philadelphia Phillies"]),
    # music
    ("Electronic music", "music", "music that employs electronic musical instruments and digital instruments",
     "origins early 20th century synthesizer", "Music genres; Electronic music", ["Techno", "House music", "Ambient music"]),
    ("Techno", "music", "genre of electronic dance music that emerged in Detroit Michigan in the 1980s",
     "tempo 120 to 150 bpm drum machine", "Electronic music genres; Electronic dance music", ["Electronic music", "House music", "Berlin"]),
    ("House music", "music", "genre of electronic dance music characterized by a repetitive four on the floor beat",
     "origin Chicago 1980s tempo 120 bpm", "Electronic music genres; Electronic dance music", ["Electronic music", "Techno"]),
    ("Drum and bass", "music", "genre of electronic music characterised by fast breakbeats with heavy bass and sub bass lines",
     "origin United Kingdom 1990s tempo 160 to 180 bpm", "Electronic music genres", ["Electronic music", "Dubstep"]),
    ("Dubstep", "music", "genre of electronic dance music that originated in South London in the early 2000s",
     "tempo 140 bpm wobble bass", "Electronic music genres", ["Drum and bass", "London"]),
    ("Ambient music", "music", "genre of music that emphasizes tone and atmosphere over traditional musical structure",
     "pioneer Brian Eno 1970s", "Electronic music genres; Music genres", ["Electronic music"]),
    ("Trance music", "music", "genre of electronic dance music that emerged from the British new age music scene and German techno scene",
     "tempo 135 to 150 bpm", "Electronic music genres", ["Techno", "Electronic music"]),
]

ALIASES = {
    "New York City": ["new york", "nyc"],
    "Albert Einstein": ["einstein"],
    "Theory of relativity": ["relativity"],
    "Golden Gate Bridge": ["golden gate"],
    "Philadelphia 76ers": ["sixers"],
    "Electronic music": ["electronic music"],
}

# Extra entity ids that never appear as documents; the linker can emit them.
EXTRA_DICTIONARY = [
    ("professional sports teams", "Professional_sports_team"),
    ("mayor", "Mayor"),
    ("music genres", "Music_genre"),
    ("nobel prize", "Nobel_Prize"),
    ("nobel prize in physics", "Nobel_Prize_in_Physics"),
    ("suspension bridge", "Suspension_bridge"),
]

QUERIES = [
    ("SemSearch_ES-1", "Brooklyn Bridge"),
    ("SemSearch_ES-2", "golden gate bridge"),
    ("SemSearch_ES-3", "albert einstein"),
    ("SemSearch_ES-4", "philadelphia eagles"),
    ("SemSearch_ES-5", "tower bridge london"),
    ("SemSearch_LS-1", "Professional sports teams in Philadelphia"),
    ("SemSearch_LS-2", "bridges in New York City"),
    ("SemSearch_LS-3", "physicists who won the Nobel Prize in Physics"),
    ("SemSearch_LS-4", "ice hockey teams"),
    ("INEX_LD-1", "Electronic music geners"),
    ("INEX_LD-2", "quantum mechanics pioneers"),
    ("INEX_LD-3", "suspension bridge steel cables"),
    ("INEX_LD-4", "electronic dance music tempo bpm"),
    ("INEX_LD-5", "rivers of New York"),
    ("QALD2_te-1", "Who is the mayor of Berlin?"),
    ("QALD2_te-2", "Which river does the Brooklyn Bridge cross?"),
    ("QALD2_te-3", "Who developed the theory of relativity?"),
    ("QALD2_te-4", "Which bridges cross the River Thames?"),
    ("QALD2_tr-5", "In which city did techno music emerge?"),
    ("QALD2_tr-6", "Which German physicists won the Nobel Prize?"),
]

# query id -> {title: grade}
QRELS = {
    "SemSearch_ES-1": {"Brooklyn Bridge": 2, "Manhattan Bridge": 0, "East River": 1},
    "SemSearch_ES-2": {"Golden Gate Bridge": 2, "San Francisco": 1, "Brooklyn Bridge": 0},
    "SemSearch_ES-3": {"Albert Einstein": 2, "Theory of relativity": 1, "Mass energy equivalence": 1, "Max Planck": 0},
    "SemSearch_ES-4": {"Philadelphia Eagles": 2, "National Football League": 1, "Philadelphia": 0},
    "SemSearch_ES-5": {"Tower Bridge": 2, "London Bridge": 1, "London": 0},
    "SemSearch_LS-1": {"Philadelphia Eagles": 2, "Philadelphia Phillies": 2, "Philadelphia 76ers": 2,
                       "Philadelphia Flyers": 2, "Philadelphia Union": 2, "Philadelphia": 0, "Boston Celtics": 0},
    "SemSearch_LS-2": {"Brooklyn Bridge": 2, "Manhattan Bridge": 2, "Williamsburg Bridge": 2,
                       "George Washington Bridge": 2, "Golden Gate Bridge": 0, "New York City": 0},
    "SemSearch_LS-3": {"Albert Einstein": 2, "Niels Bohr": 2, "Max Planck": 2, "Werner Heisenberg": 2,
                       "Erwin Schroedinger": 2, "Marie Curie": 2, "Isaac Newton": 0},
    "SemSearch_LS-4": {"Philadelphia Flyers": 2, "Pittsburgh Penguins": 2, "Boston Celtics": 0},
    "INEX_LD-1": {"Techno": 2, "House music": 2, "Drum and bass": 2, "Dubstep": 2, "Ambient music": 1,
                  "Trance music": 2, "Electronic music": 1},
    "INEX_LD-2": {"Niels Bohr": 2, "Werner Heisenberg": 2, "Max Planck": 2, "Erwin Schroedinger": 2,
                  "Quantum mechanics": 1, "Albert Einstein": 1},
    "INEX_LD-3": {"Brooklyn Bridge": 2, "Golden Gate Bridge": 2, "George Washington Bridge": 2,
                  "Manhattan Bridge": 1, "Williamsburg Bridge": 1, "Tower Bridge": 1, "London Bridge": 0},
    "INEX_LD-4": {"Techno": 2, "House music": 2, "Trance music": 2, "Dubstep": 1, "Drum and bass": 1},
    "INEX_LD-5": {"East River": 2, "Hudson River": 2, "Spree": 0, "River Thames": 0},
    "QALD2_te-1": {"Kai Wegner": 2, "Franziska Giffey": 1, "Michael Mueller": 1, "Klaus Wowereit": 1, "Berlin": 0},
    "QALD2_te-2": {"East River": 2, "Hudson River": 0},
    "QALD2_te-3": {"Albert Einstein": 2, "Theory of relativity": 0},
    "QALD2_te-4": {"Tower Bridge": 2, "London Bridge": 2, "Oberbaum Bridge": 0},
    "QALD2_tr-5": {"Techno": 1, "House music": 0},
    "QALD2_tr-6": {"Albert Einstein": 2, "Max Planck": 2, "Werner Heisenberg": 2, "Niels Bohr": 0, "Marie Curie": 0},
}

# query entity annotations imported as if from an external tagger
ANNOTATIONS = [
    ("QALD2_te-1", "Berlin"),
    ("QALD2_te-1", "Mayor"),
    ("QALD2_te-3", "Theory_of_relativity"),
]

THEMES = ["bridge", "city", "berlin", "physics", "concept", "sports", "music"]
DIM = 16


def eid(title):
    return title.replace(" ", "_")


def similar_titles(rng, title, theme):
    pool = [t for (t, th, *_rest) in ENTITIES if th == theme and t != title]
    rng.shuffle(pool)
    return sorted(pool[:3])


def build_docs(rng):
    docs = []
    for (title, theme, desc, attrs, cats, related) in ENTITIES:
        sims = similar_titles(rng, title, theme)
        names = [title] + ALIASES.get(title, [])
        cat_names = [c.strip() for c in cats.split(";")]
        text = "%s is a %s." % (title, desc)
        if related:
            text += " It is associated with %s." % ", ".join(related)
        mentioned = [eid(r) for r in related]
        doc = {
            "doc_id": eid(title),
            "names": {"text": " ".join(names), "entities": [eid(title)]},
            "attributes": {"text": attrs, "entities": []},
            "categories": {"text": "; ".join(cat_names), "entities": []},
            "similar_entity_names": {"text": ", ".join(sims), "entities": [eid(s) for s in sims]},
            "related_entity_names": {"text": ", ".join(related), "entities": [eid(r) for r in related]},
        }
        # a handful of documents have no description to exercise the empty-field path
        if title not in ("Spree", "Munich", "Philadelphia Union"):
            doc["text"] = {"text": text, "entities": mentioned}
        docs.append(doc)
    return docs


def tokenize(s):
    out, cur = [], []
    for ch in s.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def unit(rng, dim):
    v = [rng.gauss(0, 1) for _ in range(dim)]
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def fmt(v):
    return " ".join("%.6f" % x for x in v)


def write_vectors(rng, docs):
    centers = {t: unit(rng, DIM) for t in THEMES}
    theme_of = {eid(t): th for (t, th, *_r) in ENTITIES}
    # word vectors: a word takes the theme it occurs in most often
    counts = {}
    for d in docs:
        theme = theme_of[d["doc_id"]]
        for f in ("names", "attributes", "categories", "similar_entity_names", "related_entity_names", "text"):
            if f in d:
                for tok in tokenize(d[f]["text"]):
                    counts.setdefault(tok, {}).setdefault(theme, 0)
                    counts[tok][theme] += 1
    for (_qid, raw) in QUERIES:
        for tok in tokenize(raw):
            counts.setdefault(tok, {})
    words = sorted(counts)
    lines = []
    for w in words:
        # leave some words out of vocabulary
        if rng.random() < 0.04:
            continue
        themes = counts[w]
        if len(themes) == 0 or len(themes) >= 4:
            vec = [0.3 * x for x in unit(rng, DIM)]
        else:
            best = max(sorted(themes), key=lambda t: themes[t])
            noise = unit(rng, DIM)
            vec = [c + 0.6 * n for c, n in zip(centers[best], noise)]
        lines.append("%s %s" % (w, fmt(vec)))
    with open(os.path.join(HERE, "word_vectors.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")

    ents = sorted(set(eid(t) for (t, *_r) in ENTITIES) | set(e for (_p, e) in EXTRA_DICTIONARY))
    lines = []
    for e in ents:
        if e in ("Spree", "Mayor"):
            continue  # out of vocabulary on purpose
        theme = theme_of.get(e)
        base = centers[theme] if theme else [0.0] * DIM
        noise = unit(rng, DIM)
        vec = [c + 0.5 * n for c, n in zip(base, noise)]
        lines.append("%s %s" % (e, fmt(vec)))
    with open(os.path.join(HERE, "entity_vectors.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_dictionary():
    rows = []
    for (t, *_r) in ENTITIES:
        rows.append((" ".join(tokenize(t)), eid(t)))
        for a in ALIASES.get(t, []):
            rows.append((a, eid(t)))
    rows.extend(EXTRA_DICTIONARY)
    with open(os.path.join(HERE, "dictionary.tsv"), "w") as fh:
        for p, e in rows:
            fh.write("%s\t%s\n" % (p, e))


def write_training_text():
    passages = [
        "Albert Einstein was a German-born theoretical physicist who developed the "
        "[[theory of relativity|Theory of relativity]], one of the two pillars of modern physics "
        "(alongside [[quantum mechanics|Quantum mechanics]]). He is best known to the general public "
        "for his [[Mass–energy equivalence|mass–energy equivalence]] formula E = mc2 which has been "
        "dubbed \"the world's most famous equation\".",
    ]
    for (title, theme, desc, attrs, cats, related) in ENTITIES:
        rel = " and ".join("[[%s|%s]]" % (r, r.lower()) for r in related)
        passages.append("[[%s]] is a %s. It is linked to %s." % (title, desc, rel))
    with open(os.path.join(HERE, "wiki_links.txt"), "w") as fh:
        fh.write("\n".join(passages) + "\n")


def ndcg(ranked_grades, judged_grades, k):
    def dcg(gs):
        return sum((2 ** g - 1) / math.log2(i + 2) for i, g in enumerate(gs[:k]))
    ideal = dcg(sorted(judged_grades, reverse=True))
    if ideal == 0:
        return 0.0
    return dcg(ranked_grades) / ideal


def write_reference_run(rng):
    """Builds a run + qrels whose mean NDCG@10 / NDCG@100 round to the
    published FSDM all-queries row (0.4524 / 0.5342)."""
    target10, target100 = 0.4524, 0.5342
    n_queries = 24
    candidates = []
    for _ in range(3000):
        n_rel = rng.randint(1, 12)
        grades = [rng.choice([1, 2]) for _ in range(n_rel)]
        depth = 100
        slots = rng.sample(range(depth + 20), n_rel)  # slots >= depth are unretrieved
        ranked = [0] * depth
        for g, s in zip(grades, slots):
            if s < depth:
                ranked[s] = g
        candidates.append((ndcg(ranked, grades, 10), ndcg(ranked, grades, 100), grades, slots))
    chosen = rng.sample(range(len(candidates)), n_queries)

    def err(sel):
        m10 = sum(candidates[i][0] for i in sel) / n_queries
        m100 = sum(candidates[i][1] for i in sel) / n_queries
        return abs(m10 - target10) + abs(m100 - target100)

    best = err(chosen)
    for _ in range(200000):
        if best < 1e-6:
            break
        pos = rng.randrange(n_queries)
        repl = rng.randrange(len(candidates))
        if repl in chosen:
            continue
        trial = list(chosen)
        trial[pos] = repl
        e = err(trial)
        if e < best:
            chosen, best = trial, e
    m10 = sum(candidates[i][0] for i in chosen) / n_queries
    m100 = sum(candidates[i][1] for i in chosen) / n_queries
    assert round(m10, 4) == target10 and round(m100, 4) == target100, (m10, m100)

    run_lines, qrel_lines = [], []
    for qi, ci in enumerate(chosen):
        qid = "REF-%02d" % (qi + 1)
        _, _, grades, slots = candidates[ci]
        at = {s: g for g, s in zip(grades, slots)}
        for rank in range(100):
            doc = "D%03d_%03d" % (qi + 1, rank + 1)
            score = 100.0 - rank * 0.5
            run_lines.append("%s Q0 %s %d %s fsdm" % (qid, doc, rank + 1, repr(score)))
            if rank in at:
                qrel_lines.append("%s 0 %s %d" % (qid, doc, at[rank]))
            elif rank % 17 == 0:
                qrel_lines.append("%s 0 %s 0" % (qid, doc))
        for s, g in sorted(at.items()):
            if s >= 100:
                qrel_lines.append("%s 0 U%03d_%03d %d" % (qid, qi + 1, s, g))
    os.makedirs(os.path.join(HERE, "reference"), exist_ok=True)
    with open(os.path.join(HERE, "reference", "fsdm.run"), "w") as fh:
        fh.write("\n".join(run_lines) + "\n")
    with open(os.path.join(HERE, "reference", "qrels.txt"), "w") as fh:
        fh.write("\n".join(qrel_lines) + "\n")
    return m10, m100


def main():
    rng = random.Random(20180706)
    docs = build_docs(rng)
    titles = {t for (t, *_r) in ENTITIES}
    for q, rels in QRELS.items():
        for t in rels:
            assert t in titles, (q, t)
    with open(os.path.join(HERE, "corpus.jsonl"), "w") as fh:
        for d in docs:
            fh.write(json.dumps(d, ensure_ascii=False) + "\n")
    with open(os.path.join(HERE, "queries.tsv"), "w") as fh:
        for qid, raw in QUERIES:
            fh.write("%s\t%s\n" % (qid, raw))
    with open(os.path.join(HERE, "qrels.txt"), "w") as fh:
        for qid, _raw in QUERIES:
            for t, g in sorted(QRELS[qid].items()):
                fh.write("%s 0 %s %d\n" % (qid, eid(t), g))
    with open(os.path.join(HERE, "annotations.tsv"), "w") as fh:
        for q, e in ANNOTATIONS:
            fh.write("%s\t%s\n" % (q, e))
    write_vectors(rng, docs)
    write_dictionary()
    write_training_text()
    m10, m100 = write_reference_run(random.Random(4524))
    print("documents=%d queries=%d reference ndcg@10=%.6f ndcg@100=%.6f" % (len(docs), len(QUERIES), m10, m100))


if __name__ == "__main__":
    main()
