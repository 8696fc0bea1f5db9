"""Builds the scripted-backend file for the FLINK-1320 golden run.

Prompts are rebuilt here from the documented templates and the hand-written
sentence table, so a byte drift in the Rust prompt builders shows up as a
script miss.
"""
import hashlib
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.dirname(HERE)

INSTRUCTION = ("The following two sentences may be argument or solution for an issue. "
               "Is their relationship argument-solution supporting, complementary, or unrelated?")


def sha(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def dsea_prompt(sentence, summary):
    return f"{sentence} is [MASK] related to the issue: {summary}"


def dspa_generation_prompt(s1, s2):
    same = s1["source"].startswith("comment:") and s1["source"] == s2["source"]
    dist = abs(s1["global_index"] - s2["global_index"])
    clause = f"Two sentences are {'in' if same else 'not in'} the same comment and their distance is {dist}."
    return (f"### Instruction:\n{INSTRUCTION}\n### Input:\nSentence 1: {s1['text']}\n"
            f"Sentence 2: {s2['text']}\n{clause}\n### Response:\n")


sentences = {s["id"]: s for s in json.load(open(os.path.join(FIX, "flink-1320-sentences.json")))}
summary = sentences["sum-s0"]["text"]

design = ["d-s1", "d-s2", "c0-s0", "c0-s1", "c1-s0", "c2-s0"]
probs_design = [0.9, 0.2, 0.1, 0.3, 0.1, 0.2, 0.1, 0.05, 0.01, 0.02, 0.01, 0.03, 0.01, 0.02]
mask = {sha(dsea_prompt(sentences[i]["text"], summary)): probs_design for i in design}

# (sentence 1, sentence 2) -> generated text
responses = {
    ("d-s1", "d-s2"): "supporting",
    ("d-s2", "d-s1"): "unrelated",
    ("d-s1", "c0-s0"): "Supporting",
    ("c0-s0", "d-s1"): "unrelated",
    ("d-s1", "c0-s1"): "complementary",
    ("d-s1", "c1-s0"): "unrelated",
    ("d-s1", "c2-s0"): "unrelated",
    ("d-s2", "c0-s0"): "complementary",
    ("d-s2", "c0-s1"): "unrelated",
    ("d-s2", "c1-s0"): "supporting",
    ("c1-s0", "d-s2"): "supporting",
    ("d-s2", "c2-s0"): "The two sentences are unrelated.",
    ("c0-s0", "c0-s1"): "supporting",
    ("c0-s1", "c0-s0"): "supporting",
    ("c0-s0", "c1-s0"): "unrelated",
    ("c0-s0", "c2-s0"): "unrelated",
    ("c0-s1", "c1-s0"): "unrelated",
    ("c0-s1", "c2-s0"): "unrelated",
    ("c1-s0", "c2-s0"): "I cannot tell from the context.",
}
generate = {sha(dspa_generation_prompt(sentences[a], sentences[b])): text
            for (a, b), text in responses.items()}

script = {
    "mask_probs": dict(sorted(mask.items())),
    "generate": dict(sorted(generate.items())),
    "default_probs": [0.05, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.3, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1],
}
with open(os.path.join(FIX, "flink-1320-script.json"), "w") as f:
    json.dump(script, f, indent=2)
    f.write("\n")
