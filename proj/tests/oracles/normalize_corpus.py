#!/usr/bin/env python3
"""Reference normalizer for the SGD and MultiWOZ mini-fixtures.

Writes the golden JSON-lines files checked in under tests/data/golden.
Usage: normalize_corpus.py sgd|multiwoz INPUT_DIR OUTPUT_FILE
"""
import json
import pathlib
import sys


def add(pairs, pair):
    if pair not in pairs:
        pairs.append(pair)


def sgd_frame(frame):
    state = frame.get("state", {})
    pairs = []
    for slot, values in state.get("slot_values", {}).items():
        for v in ([values] if isinstance(values, str) else values):
            add(pairs, [slot, v])
    for action in frame.get("actions", []):
        slot = action.get("slot", "")
        values = action.get("values", [])
        if not values and slot:
            add(pairs, [slot, ""])
        for v in values:
            add(pairs, [slot, v])
    return {"domain": frame["service"], "intent": state.get("active_intent", ""), "slot_values": pairs}


def load_sgd(root):
    out = []
    for path in sorted(p for p in root.glob("*.json") if p.name != "schema.json"):
        for d in json.loads(path.read_text(encoding="utf-8")):
            turns = [
                {
                    "speaker": t["speaker"].upper(),
                    "turn_index": i,
                    "text": t["utterance"],
                    "annotations": [sgd_frame(f) for f in t["frames"]],
                }
                for i, t in enumerate(d["turns"])
            ]
            out.append({"dialogue_id": d["dialogue_id"], "turns": turns})
    return out


def scalar(v):
    return v if isinstance(v, str) else json.dumps(v)


def load_multiwoz(root):
    out = []
    for path in sorted(root.glob("*.json")):
        for name, body in json.loads(path.read_text(encoding="utf-8")).items():
            turns = []
            for i, entry in enumerate(body["log"]):
                frames = []
                for key, args in (entry.get("dialog_act") or {}).items():
                    domain, sep, intent = key.partition("-")
                    if not sep:
                        domain, intent = "", key
                    frames.append({"domain": domain, "intent": intent,
                                   "slot_values": [[scalar(s), scalar(v)] for s, v in args]})
                turns.append({"speaker": "USER" if i % 2 == 0 else "SYSTEM", "turn_index": i,
                              "text": entry["text"], "annotations": frames})
            out.append({"dialogue_id": name, "turns": turns})
    return out


def main():
    fmt, src, dst = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    dialogues = load_sgd(src) if fmt == "sgd" else load_multiwoz(src)
    dialogues.sort(key=lambda d: d["dialogue_id"].encode("utf-8"))
    with open(dst, "w", encoding="utf-8", newline="\n") as f:
        for d in dialogues:
            f.write(json.dumps(d, ensure_ascii=False, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
