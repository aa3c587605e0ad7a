# Annotate tasks against the three-dimension rubric using a replay file
# instead of a live endpoint, then aggregate votes and compare annotator sets.

import json
import tempfile
from pathlib import Path

from aidisrupt.annotate import (
    Annotation,
    Dimension,
    EndpointConfig,
    agreement_rate,
    annotate_llm,
    consensus_labels,
    majority_vote,
    render_prompt,
    _request_key,
)
from aidisrupt.corpus import TaskRecord

tasks = [
    TaskRecord("T1", "Assemble engine housings on the line", "O1"),
    TaskRecord("T2", "Negotiate vendor contracts", "O2"),
    TaskRecord("T3", "File monthly compliance paperwork", "O2"),
]

# The prompt template is fixed; only the task text is substituted.
prompt = render_prompt(tasks[0], Dimension.NATURE)
print("prompt head:", prompt[:72].replace("\n", " "), "...")

# A replay file maps each request (hashed) to a canned chat response, so the
# whole annotation stage runs offline and byte-reproducibly.
workdir = Path(tempfile.mkdtemp())
replay = workdir / "replay.ndjson"
config = EndpointConfig(base_url="", model="annotator", credential_env="", replay_path=replay)
canned = {"T1": "P", "T2": "M", "T3": "M"}
lines = []
for t in tasks:
    body = {"model": config.model, "messages": [{"role": "user", "content": render_prompt(t, Dimension.NATURE)}]}
    reply = json.dumps({"Task": t.description, "Label of Nature (P/M)": canned[t.task_id]})
    lines.append(json.dumps({"key": _request_key(body), "request": body,
                             "response": {"choices": [{"message": {"content": reply}}]}}))
replay.write_text("\n".join(lines) + "\n")

run = annotate_llm(tasks, Dimension.NATURE, config)
for a in run.annotations:
    print(f"  {a.task_id}: {a.label} (source={a.source})")

# Crowd annotations aggregate by majority vote; three binary votes always
# have a winner.
votes = [Annotation("T1", Dimension.NATURE, lab, "human", f"w{i}") for i, lab in enumerate("PPM")]
print("majority of P,P,M:", majority_vote(votes).label)

llm_cons = consensus_labels(run.annotations)
human_votes = []
for t, lab in zip(tasks, ["P", "M", "P"]):  # crowd disagrees with the model on T3
    for w in ("w1", "w2", "w3"):
        human_votes.append(Annotation(t.task_id, Dimension.NATURE, lab, "human", w))
human_cons = consensus_labels(human_votes, required_n=3)
print("llm vs human agreement:", agreement_rate(llm_cons, human_cons, Dimension.NATURE), "%")
