#!/usr/bin/env python3
"""Writes fixtures/nscl-mini.json and fixtures/nscl-mini-unlabeled.json."""
import json
import pathlib

DC, TO, EV = "DiseaseCondition", "TreatmentOption", "Evaluation"

NODES = [
    ("n01", DC, "Stage IB, peripheral (T2a, N0); Stage I, central (T1abc-T2a, N0); Stage II (T1abc-T2ab, N1; T2b, N0); Stage IIB (T3, N0); Stage IIIA (T3, N1)", "CLINICAL STAGE", "NSCL-2"),
    ("n02", DC, "Stage IB (peripheral T2a, N0) Stage I (central T1abc-T2a, N0) Stage II (T1abc-T2ab, N1; T2b, N0) Stage IIB (T3, N0) Stage IIIA (T3, N1)", "CLINICAL ASSESSMENT", "NSCL-2"),
    ("n03", EV, "Evaluate for perioperative therapy , PFTs (if not previously done) , Bronchoscopy, Pathologic mediastinal lymph node evaluation , FDG-PET/CT scan (if not previously done) , Brain MRI with contrast (Stage II, IIIA) (Stage IB [optional])", "PRETREATMENT EVALUATION", "NSCL-2"),
    ("n04", DC, "No nodal disease", None, "NSCL-2"),
    ("n05", DC, "Operable", None, "NSCL-2"),
    ("n06", TO, "Surgical exploration and resection + mediastinal lymph node dissection or systematic lymph node sampling after preoperative systemic therapy, if planned", "INITIAL TREATMENT", "NSCL-2"),
    ("n07", DC, "Medically inoperable", None, "NSCL-2"),
    ("n08", TO, "Definitive RT including stereotactic ablative radiotherapy (SABR)", "INITIAL TREATMENT", "NSCL-2"),
    ("n09", DC, "N1 or N2 disease", None, "NSCL-2"),
    ("n10", DC, "N2 nodes positive, M0", None, "NSCL-2"),
    ("n11", TO, "Systemic therapy followed by surgical resection", "INITIAL TREATMENT", "NSCL-2"),
    ("n12", EV, "Surveillance: H&P and chest CT every 6 months for 2-3 years", "SURVEILLANCE", "NSCL-4"),
    ("n13", DC, "Locoregional recurrence", None, "NSCL-4"),
    ("n14", TO, "Systemic therapy for recurrence", "THERAPY FOR RECURRENCE", "NSCL-4"),
    ("n15", DC, "Stage IIIB (T4, N2) Stage IIIC (T4, N3)", "CLINICAL STAGE", "NSCL-3"),
    ("n16", EV, "FDG-PET/CT scan (if not previously done) , Brain MRI with contrast , Pathologic confirmation of N2-3 disease by either: Mediastinoscopy Supraclavicular lymph node biopsy Thoracoscopy Needle biopsy Mediastinotomy EUS biopsy EBUS biopsy", "PRETREATMENT EVALUATION", "NSCL-3"),
    ("n17", DC, "Contralateral mediastinal node negative", None, "NSCL-3"),
    ("n18", DC, "Ipsilateral mediastinal node negative (T4, N0-1)", None, "NSCL-3"),
    ("n19", DC, "Stage IIIA (T4, N0-1) unresectable", None, "NSCL-3"),
    ("n20", TO, "Definitive concurrent chemoradiation (category 1)", "INITIAL TREATMENT", "NSCL-3"),
    ("n21", DC, "Contralateral mediastinal node positive (T4, N3)", None, "NSCL-3"),
    ("n22", DC, "Ipsilateral mediastinal node positive (T4, N2)", None, "NSCL-3"),
    ("n23", TO, "Concurrent chemoradiation", "INITIAL TREATMENT", "NSCL-3"),
    ("n24", DC, "Stage IIIA (T4, N0-1) resectable", None, "NSCL-3"),
    ("n25", TO, "Surgery with or without preoperative systemic therapy", "INITIAL TREATMENT", "NSCL-3"),
    ("n26", EV, "Response assessment with chest CT with contrast", "ADJUVANT TREATMENT", "NSCL-3"),
    ("n27", DC, "No disease progression", None, "NSCL-3"),
    ("n28", TO, "Durvalumab consolidation therapy", "ADJUVANT TREATMENT", "NSCL-3"),
    ("n29", TO, "Adjuvant systemic therapy", "ADJUVANT TREATMENT", "NSCL-3"),
    ("n30", DC, "Positive margins (R1, R2)", None, "NSCL-3"),
    ("n31", TO, "Re-resection or chemoradiation", "ADJUVANT TREATMENT", "NSCL-3"),
    ("n32", DC, "Superior sulcus", "CLINICAL PRESENTATION", "NSCL-5"),
    ("n33", DC, "Resectable", None, "NSCL-5"),
    ("n34", DC, "Marginally resectable", None, None),
    ("n35", TO, "Preoperative concurrent chemoradiation", "INITIAL TREATMENT", "NSCL-5"),
    ("n36", EV, "Surgical re-evaluation including chest CT with contrast", None, "NSCL-5"),
    ("n37", DC, "Unresectable", None, None),
    ("n38", EV, "Annual low-dose CT", "SURVEILLANCE", "NSCL-4"),
]

EDGES = [
    # stage I-IIIA branch
    ("n01", "n02"), ("n02", "n03"), ("n03", "n04"), ("n03", "n09"),
    ("n04", "n05"), ("n04", "n07"), ("n05", "n06"), ("n07", "n08"),
    ("n09", "n10"), ("n10", "n11"), ("n09", "n05"),
    # surveillance loop
    ("n06", "n12"), ("n08", "n12"), ("n11", "n12"), ("n12", "n13"), ("n13", "n14"),
    ("n14", "n12"), ("n12", "n38"), ("n38", "n13"), ("n06", "n29"),
    # stage IIIB-IIIC branch
    ("n15", "n16"), ("n16", "n17"), ("n16", "n21"), ("n17", "n18"), ("n17", "n22"),
    ("n18", "n19"), ("n18", "n24"), ("n19", "n20"), ("n24", "n25"), ("n21", "n23"),
    ("n22", "n23"), ("n20", "n26"), ("n23", "n26"), ("n26", "n27"), ("n27", "n28"),
    ("n28", "n12"), ("n25", "n29"), ("n29", "n30"), ("n30", "n31"), ("n31", "n12"),
    # superior sulcus
    ("n32", "n33"), ("n32", "n34"), ("n33", "n35"), ("n34", "n35"), ("n35", "n36"),
    ("n36", "n37"), ("n36", "n33"), ("n37", "n23"), ("n33", "n25"),
]


def relation(src, dst):
    if src == DC and dst == TO:
        return "requires"
    if src == EV and dst == DC:
        return "indicates"
    return "isFollowedBy"


def document(labeled):
    cat = {n[0]: n[1] for n in NODES}
    nodes = [
        {"id": i, "content": c, "context": ctx, "category": k if labeled else None, "page": p}
        for i, k, c, ctx, p in sorted(NODES)
    ]
    edges = [
        {"source": s, "target": t, "relation": relation(cat[s], cat[t]) if labeled else None}
        for s, t in sorted(EDGES)
    ]
    return {"@context": "https://example.org/cpg/v1", "version": "nscl-mini-1", "nodes": nodes, "edges": edges}


if __name__ == "__main__":
    out = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
    out.mkdir(exist_ok=True)
    for name, labeled in (("nscl-mini.json", True), ("nscl-mini-unlabeled.json", False)):
        (out / name).write_text(json.dumps(document(labeled), indent=2, ensure_ascii=False) + "\n")
    print(len(NODES), "nodes,", len(EDGES), "edges")
