"""Regenerate the bundled extraction fixtures.

Runs the packaged demo config up to document selection, then records
canned model responses for every prompt the extraction stage will
issue, keyed by request hash. Finishes with a full replay run to prove
the fixtures are complete and the demo job reaches a clean KG.

Usage: python3 scripts/gen_fixtures.py
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from techkg import data
from techkg.extraction import RecordTransport, Transport, extract_document
from techkg.pipeline import Pipeline, PipelineConfig

EXPECTED_SELECTION = {"n01", "s02", "s04", "p01", "p02"}

# phase-1 responses keyed by a phrase unique to the document's passage
PHASE1 = {
    "zonal ECU designs": """```json
[
  {"head": "zonal ECU architecture", "relation": "has benefit", "tail": "reduced wiring"},
  {"head": "zonal ECU architecture", "relation": "connected to", "tail": "central gateway"},
  {"head": "zonal ECU architecture", "relation": "solves", "tail": "harness complexity"}
]
```""",
    "condition monitoring of the Automotive Alternator": """[
  {"head": "Automotive Alternator", "relation": "embodied by", "tail": "engine"},
  {"head": "Automotive Alternator", "relation": "solves", "tail": "battery drain"},
  {"head": "battery drain", "relation": "has symptom", "tail": "slow cranking"}
]""",
    "fault patterns from random fuzzy data": """Here are the extracted triples:
[
  {"head": "random fuzzy data", "relation": "has symptom", "tail": "data explosion"},
  {"head": "uncertainty-aware learning", "relation": "solves", "tail": "random fuzzy data"}
]""",
    "Anti-interference controller area network transceiver": """[
  {"head": "CAN bus", "relation": "has benefit", "tail": "anti-interference"},
  {"head": "CAN bus", "relation": "embodied by", "tail": "twisted pair transceiver"},
  {"head": "twisted pair transceiver", "relation": "has usage", "tail": "in-vehicle messaging"}
]""",
    "Bidirectional charging system with grid feedback": """[
  {"head": "bidirectional charging system", "relation": "has improvement", "tail": "grid feedback"},
  {"head": "bidirectional charging system", "relation": "has benefit", "tail": "peak shaving"}
]""",
}

# phase-2 responses keyed by a head that appears only in that batch.
# grid feedback is deliberately misfiled as Usage so the demo exercises
# the quarantine path.
PHASE2 = {
    "zonal ECU architecture": """[
  {"head": "zonal ECU architecture", "relation": "has benefit", "tail": "reduced wiring", "head_class": "Innovation", "tail_class": "Benefit"},
  {"head": "zonal ECU architecture", "relation": "solves", "tail": "harness complexity", "head_class": "Innovation", "tail_class": "Problem"}
]""",
    "Automotive Alternator": """[
  {"head": "Automotive Alternator", "relation": "embodied by", "tail": "engine", "head_class": "Innovation", "tail_class": "Embodiment"},
  {"head": "Automotive Alternator", "relation": "solves", "tail": "battery drain", "head_class": "Innovation", "tail_class": "Problem"},
  {"head": "battery drain", "relation": "has symptom", "tail": "slow cranking", "head_class": "Problem", "tail_class": "Symptom"}
]""",
    "random fuzzy data": """[
  {"head": "random fuzzy data", "relation": "has symptom", "tail": "data explosion", "head_class": "Problem", "tail_class": "Symptom"},
  {"head": "uncertainty-aware learning", "relation": "solves", "tail": "random fuzzy data", "head_class": "Innovation", "tail_class": "Problem"}
]""",
    "CAN bus": """[
  {"head": "CAN bus", "relation": "has benefit", "tail": "anti-interference", "head_class": "Innovation", "tail_class": "Benefit"},
  {"head": "CAN bus", "relation": "embodied by", "tail": "twisted pair transceiver", "head_class": "Innovation", "tail_class": "Embodiment"},
  {"head": "twisted pair transceiver", "relation": "has usage", "tail": "in-vehicle messaging", "head_class": "Embodiment", "tail_class": "Usage"}
]""",
    "bidirectional charging system": """[
  {"head": "bidirectional charging system", "relation": "has improvement", "tail": "grid feedback", "head_class": "Innovation", "tail_class": "Usage"},
  {"head": "bidirectional charging system", "relation": "has benefit", "tail": "peak shaving", "head_class": "Innovation", "tail_class": "Benefit"}
]""",
}


class ScriptedTransport(Transport):
    mode = "scripted"

    def _complete(self, prompt: str) -> str:
        table = PHASE1 if "Sentence:" in prompt else PHASE2
        hits = [key for key in table if key in prompt]
        if len(hits) != 1:
            raise RuntimeError(f"ambiguous or missing script key: {hits!r}")
        return table[hits[0]]


def demo_config(overrides=None) -> PipelineConfig:
    obj = json.loads(data.config_path().read_text(encoding="utf-8"))
    obj.update(overrides or {})
    return PipelineConfig.from_obj(obj, base_dir=data.DATA_DIR)


def main():
    fixtures = data.fixtures_dir()
    if fixtures.exists():
        shutil.rmtree(fixtures)
    fixtures.mkdir()

    with tempfile.TemporaryDirectory() as tmp:
        pipe = Pipeline(Path(tmp) / "job", config=demo_config())
        for stage in ("ingested", "keyphrases_done", "network_built", "selected"):
            pipe.run_stage(stage)

        scores = pipe.scores()["scores"]
        print("kept terms:", [s["term_id"] for s in scores])
        topicmap = pipe.topicmap()
        print("topic map:", topicmap["stats"])

        selection = [e["doc_id"] for e in pipe.selection()]
        print("selected:", selection)
        assert set(selection) == EXPECTED_SELECTION, selection

        schema = pipe._schema()
        recorder = RecordTransport(ScriptedTransport("demo-llm"), fixtures)
        store = pipe._store()
        triples = []
        for doc_id in selection:
            doc = store.get(doc_id)
            triples.extend(
                extract_document(Pipeline._doc_text(doc), schema, recorder, doc_id=doc_id)
            )
        print(f"recorded {len(list(fixtures.iterdir()))} fixtures, {len(triples)} triples")

        samples = {
            ("Automotive Alternator", "embodied by", "engine"),
            ("random fuzzy data", "has symptom", "data explosion"),
            ("CAN bus", "has benefit", "anti-interference"),
        }
        got = {(t.head, t.relation, t.tail) for t in triples}
        assert samples <= got, samples - got

    # prove the fixtures replay cleanly, end to end, twice
    digests = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            pipe = Pipeline(Path(tmp) / "job", config=demo_config())
            pipe.run_all()
            stats = pipe.load_artifact("exported", "stats.json")
            validation = pipe.validation()
            assert stats["class_count"] >= 10, stats
            assert validation["summary"]["violation_count"] == 0, validation
            assert validation["summary"]["removed_axiom_count"] >= 1, validation
            tree = {}
            root = Path(tmp) / "job" / "artifacts"
            for path in sorted(root.rglob("*")):
                if path.is_file():
                    tree[str(path.relative_to(root))] = path.read_bytes()
            digests.append(tree)
            print("replay run ok:", stats)
    assert digests[0] == digests[1], "artifacts differ between runs"
    print("byte-identical across two runs")


if __name__ == "__main__":
    main()
