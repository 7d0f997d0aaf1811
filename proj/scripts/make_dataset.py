#!/usr/bin/env python3
"""Writes fixtures/qa.json (questions + gold queries) and fixtures/qa-replies.json
(scripted completion per test question, with the error type it is built to show)."""
import itertools
import json
import pathlib
import sys

import networkx as nx

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))
import make_fixture as fx  # noqa: E402

ROOT = pathlib.Path(__file__).resolve().parent.parent
CAT = {n[0]: n[1] for n in fx.NODES}
TEXT = {n[0]: n[2] for n in fx.NODES}
G = nx.DiGraph(fx.EDGES)


def dist(a, b):
    try:
        return nx.shortest_path_length(G, a, b)
    except nx.NetworkXNoPath:
        return None


def nearest_treatment(a):
    ds = [dist(a, t) for t in CAT if CAT[t] == fx.TO and t != a]
    ds = [d for d in ds if d]
    return min(ds) if ds else None


def set_a_query(needle, lo, hi, context=None):
    where = f'toLower(n.content) CONTAINS "{needle}"'
    if context:
        where += f' AND\ntoLower(n.context) CONTAINS "{context}"'
    return (f"MATCH (n:Disease_Condition)\nWHERE\n{where}\nWITH n\n"
            f"MATCH path=(n)-[*{lo}..{hi}]->(t:Treatment_Option)\nRETURN path, nodes(path);")


def set_b_query(needles, bounds):
    names = ["n"] + [f"c{i}" for i in range(1, len(needles))]
    pat = "MATCH path=(n:Disease_Condition)"
    for i, (lo, hi) in enumerate(bounds):
        nxt = names[i + 1] + ":Disease_Condition" if i + 1 < len(names) else "t:Treatment_Option"
        pat += f"\n-[*{lo}..{hi}]->({nxt})"
    conds = [f'toLower({v}.content) CONTAINS "{s}"' for v, s in zip(names, needles)]
    return pat + " WHERE\n" + "\nAND ".join(conds) + "\nRETURN path, nodes(path), t.content;"


# ---- Set A: generic treatment questions about one condition ----
SET_A = [
    ("What is the treatment pathway for Stage I, central (T1abc-T2a, N0)?", "stage i, central (t1abc-t2a, n0)", "clinical stage", "n01"),
    ("What is the treatment pathway for Stage IB, peripheral (T2a, N0)?", "stage ib, peripheral (t2a, n0)", "clinical stage", "n01"),
    ("What is the treatment pathway for Stage II (T1abc-T2ab, N1; T2b, N0)?", "stage ii (t1abc-t2ab, n1; t2b, n0)", "clinical stage", "n01"),
    ("What is the treatment pathway for Stage IIB (T3, N0)?", "stage iib (t3, n0)", "clinical stage", "n01"),
    ("What is the treatment pathway for Stage IIIA (T3, N1)?", "stage iiia (t3, n1)", "clinical stage", "n01"),
    ("What is the treatment pathway for Stage IIIB (T4, N2)?", "stage iiib (t4, n2)", None, "n15"),
    ("What is the treatment pathway for Stage IIIC (T4, N3)?", "stage iiic (t4, n3)", None, "n15"),
    ("What is the treatment pathway for a superior sulcus tumor?", "superior sulcus", None, "n32"),
    ("What is the treatment pathway for locoregional recurrence?", "locoregional recurrence", None, "n13"),
    ("What is the treatment pathway for a medically inoperable patient?", "medically inoperable", None, "n07"),
    ("What is the treatment pathway for N1 or N2 disease?", "n1 or n2 disease", None, "n09"),
    ("What is the treatment pathway when there is no nodal disease?", "no nodal disease", None, "n04"),
    ("What is the treatment pathway for an operable patient?", "operable", None, "n05"),
    ("What is the treatment pathway for a marginally resectable tumor?", "marginally resectable", None, "n34"),
    ("What is the treatment pathway for an unresectable tumor?", "unresectable", None, "n37"),
    ("What is the treatment pathway when there is no disease progression?", "no disease progression", None, "n27"),
    ("What is the treatment pathway for positive margins (R1, R2)?", "positive margins (r1, r2)", None, "n30"),
    ("What is the treatment pathway for contralateral mediastinal node positive (T4, N3)?", "contralateral mediastinal node positive", None, "n21"),
    ("What is the treatment pathway for ipsilateral mediastinal node positive (T4, N2)?", "ipsilateral mediastinal node positive", None, "n22"),
    ("What is the treatment pathway for Stage IIIA (T4, N0-1) unresectable?", "stage iiia (t4, n0-1) unresectable", None, "n19"),
    ("What is the treatment pathway for Stage IIIA (T4, N0-1) resectable?", "stage iiia (t4, n0-1) resectable", None, "n24"),
    ("What is the treatment pathway for N2 nodes positive, M0?", "n2 nodes positive, m0", None, "n10"),
    ("What is the treatment pathway for contralateral mediastinal node negative?", "contralateral mediastinal node negative", None, "n17"),
    ("What is the treatment pathway for ipsilateral mediastinal node negative (T4, N0-1)?", "ipsilateral mediastinal node negative (t4, n0-1)", None, "n18"),
    ("What is the treatment pathway for a resectable superior sulcus tumor?", "resectable", None, "n33"),
    ("What is the treatment pathway for a Stage IIIB or IIIC patient?", "stage iiib (t4, n2) stage iiic (t4, n3)", None, "n15"),
]
SET_A_TRAIN = {7, 12, 15}  # three train questions

# Scripted corruptions over Set A test questions: index -> error type.
SET_A_ERRORS = {3: "TypeI", 24: "TypeII", 10: "TypeII", 19: "TypeII", 5: "TypeIII", 11: "TypeIII"}

REFERENCE_B_QUESTION = ("What is the recommended treatment option for a Stage IIIB (T4, N2) patient with contralateral "
                    "mediastinal node negative and ipsilateral mediastinal node negative?")
REFERENCE_B_CHAIN = ("n15", "n17", "n18")


def reference_query(name):
    return (ROOT / "fixtures" / "queries" / name).read_text().rstrip("\n")


def set_a_entry(i):
    text, needle, ctx, start = SET_A[i]
    d = nearest_treatment(start)
    lo = 2 if ctx else 1
    return text, set_a_query(needle, lo, 5 if d <= 5 else d, ctx), (needle, ctx, start, d)


# ---- Set B: multi-condition questions along condition chains ----
def condition_chains():
    dcs = sorted(n for n in CAT if CAT[n] == fx.DC)
    chains = []
    for a, b in itertools.permutations(dcs, 2):
        d = dist(a, b)
        if d and d <= 4 and nearest_treatment(b) and nearest_treatment(b) <= 4:
            chains.append((a, b))
    for a, b, c in itertools.permutations(dcs, 3):
        if (a, b) in chains and dist(b, c) and dist(b, c) <= 4 and nearest_treatment(c) and nearest_treatment(c) <= 4:
            chains.append((a, b, c))
    return chains


def lower(s):
    return s.lower()


def set_b_question(chain):
    head = TEXT[chain[0]]
    rest = " and ".join(lower(TEXT[c]) for c in chain[1:])
    return f"What is the recommended treatment option for a {head} patient with {rest}?"


def main():
    chains = condition_chains()
    # Prefer chains that start at a clinical stage or presentation node.
    chains.sort(key=lambda c: (CAT[c[0]] != fx.DC or c[0] not in ("n01", "n15", "n32"), -len(c), c))
    chains = chains[:46]
    assert len(chains) == 46, len(chains)
    # The reference question sits at a test, error-free slot.
    chains.remove(REFERENCE_B_CHAIN) if REFERENCE_B_CHAIN in chains else chains.pop()
    chains.insert(4, REFERENCE_B_CHAIN)

    dataset, replies = [], {}

    for i in range(len(SET_A)):
        text, gold, (needle, ctx, start, d) = set_a_entry(i)
        qid = f"A{i + 1:02d}"
        split = "train" if i in SET_A_TRAIN else "test"
        dataset.append({"id": qid, "text": text, "set": "A", "split": split, "goldQuery": gold})
        if split == "train":
            continue
        kind = SET_A_ERRORS.get(i, "NoError")
        lo = 2 if ctx else 1
        if i == 0:
            reply = reference_query("set-a-generated.cql")
        elif kind == "NoError":
            reply = gold
        elif kind == "TypeI":
            reply = gold.replace("MATCH path=(n)", "MATCH path=(n", 1)
        elif kind == "TypeII":
            merged = {3: None}.get(i) or {24: "resectable superior sulcus", 10: "n1 n2 disease",
                                          19: "unresectable stage iiia (t4, n0-1)"}[i]
            reply = set_a_query(merged, lo, 5, ctx)
        else:
            assert d >= 2
            reply = set_a_query(needle, 1, d - 1, ctx)
        replies[qid] = {"reply": reply, "expect": kind}

    set_b_train = set(range(0, 46, 5))  # ten train questions
    b_errors = {1: "TypeI", 12: "TypeI", 33: "TypeI"}
    b_errors.update({i: "TypeII" for i in (2, 7, 14, 18, 23, 27, 38, 44)})
    b_errors.update({i: "TypeIII" for i in (3, 21, 42)})
    for i, chain in enumerate(chains):
        qid = f"B{i + 1:02d}"
        needles = [lower(TEXT[c]) for c in chain]
        bounds = [(1, 4)] * len(chain)
        gold = set_b_query(needles, bounds)
        split = "train" if i in set_b_train else "test"
        assert not (split == "train" and i in b_errors)
        text = REFERENCE_B_QUESTION if chain == REFERENCE_B_CHAIN else set_b_question(chain)
        dataset.append({"id": qid, "text": text, "set": "B", "split": split, "goldQuery": gold})
        if split == "train":
            continue
        kind = b_errors.get(i, "NoError")
        if chain == REFERENCE_B_CHAIN:
            reply = reference_query("set-b-generated.cql")
        elif kind == "NoError":
            reply = gold if i % 3 else "```cypher\n" + gold + "\n```"
        elif kind == "TypeI":
            reply = gold.replace("RETURN path, nodes(path), t.content;", "RETURN path, nodes(path), t.content,;")
        elif kind == "TypeII":
            # Condition text split across the wrong boundary.
            merged = needles[:]
            merged[-1] = needles[-1] + " " + needles[0]
            reply = set_b_query(merged, bounds)
        else:
            hops = [dist(a, b) for a, b in zip(chain, chain[1:])]
            tight = [(1, max(1, h - 1)) if h > 1 else (1, 1) for h in hops] + [(1, 1)]
            reply = set_b_query(needles, tight)
        replies[qid] = {"reply": reply, "expect": kind}

    out = ROOT / "fixtures"
    (out / "qa.json").write_text(json.dumps(dataset, indent=2, ensure_ascii=False) + "\n")
    (out / "qa-replies.json").write_text(json.dumps(replies, indent=2, ensure_ascii=False) + "\n")
    counts = {}
    for qid, r in replies.items():
        counts.setdefault(qid[0], {}).setdefault(r["expect"], 0)
        counts[qid[0]][r["expect"]] += 1
    print(json.dumps(counts, sort_keys=True))


if __name__ == "__main__":
    main()
