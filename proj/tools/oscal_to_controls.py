#!/usr/bin/env python3
"""Convert an OSCAL catalog (e.g. the published SP 800-53 rev5 JSON) into
the controls.json schema read by `covaudit`.

    oscal_to_controls.py catalog.json -o controls.json [--enhancements]
        [--families AC,AU] [--baseline profile.json ...]

Severity comes from baseline profiles passed with --baseline (repeatable);
a control in several baselines gets the highest. Without one it is left out.
"""

import argparse
import json
import re
import sys

PARAM = re.compile(r"\{\{\s*insert:\s*param,\s*([^}\s]+)\s*\}\}")


def param_text(params, pid):
    p = params.get(pid, {})
    if p.get("label"):
        return "[" + p["label"] + "]"
    sel = p.get("select", {})
    if sel.get("choice"):
        return "[" + " | ".join(sel["choice"]) + "]"
    return "[assignment]"


def prose_of(part, params):
    out = []
    prose = part.get("prose", "")
    if prose:
        out.append(PARAM.sub(lambda m: param_text(params, m.group(1)), prose).strip())
    for sub in part.get("parts", []):
        out.extend(prose_of(sub, params))
    return out


def find_part(control, name):
    for p in control.get("parts", []):
        if p.get("name") == name:
            return p
    return None


def display_id(oscal_id):
    # ac-2.1 -> AC-2(1)
    base, _, enh = oscal_id.partition(".")
    return base.upper() + (f"({enh})" if enh else "")


def first_sentence(text):
    m = re.match(r"(.+?[.!?])(\s|$)", text.strip(), re.S)
    return (m.group(1) if m else text).strip()


def convert(control, family, params, severity):
    local = dict(params)
    for p in control.get("params", []):
        local[p["id"]] = p
    statement = find_part(control, "statement") or {}
    items = prose_of(statement, local)
    guidance = find_part(control, "guidance")
    text = " ".join(items) or control.get("title", "")
    intent = first_sentence(" ".join(prose_of(guidance, local))) if guidance else ""
    expected = [" ".join(prose_of(sub, local)) for sub in statement.get("parts", [])] or items[:1]
    rec = {
        "control_id": display_id(control["id"]),
        "control_name": control.get("title", control["id"]),
        "family": family,
        "control_text": text,
        "intent": intent or control.get("title", ""),
        "expected_elements": [first_sentence(e)[:160] for e in expected] or [control.get("title", "")],
    }
    sev = severity.get(control["id"])
    if sev:
        rec["severity"] = sev
    return rec


def withdrawn(control):
    return any(p.get("name") == "status" and p.get("value") == "withdrawn" for p in control.get("props", []))


RANK = {"LOW": 0, "MEDIUM": 1, "HIGH": 2}


def baseline_levels(paths):
    """Control id -> HIGH/MEDIUM/LOW from profiles' include-controls lists."""
    out = {}
    for path in paths:
        with open(path, encoding="utf-8") as f:
            prof = json.load(f)["profile"]
        title = prof.get("metadata", {}).get("title", "").lower()
        level = "HIGH" if "high" in title else "MEDIUM" if "moderate" in title else "LOW"
        for imp in prof.get("imports", []):
            for inc in imp.get("include-controls", []):
                for cid in inc.get("with-ids", []):
                    if RANK[level] > RANK.get(out.get(cid, ""), -1):
                        out[cid] = level
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("catalog")
    ap.add_argument("-o", "--out", default="-")
    ap.add_argument("--enhancements", action="store_true", help="include control enhancements")
    ap.add_argument("--families", default="", help="comma-separated family ids to keep")
    ap.add_argument("--baseline", action="append", default=[], help="profile JSON used for severity")
    args = ap.parse_args(argv)

    with open(args.catalog, encoding="utf-8") as f:
        catalog = json.load(f)["catalog"]
    keep = {x.strip().upper() for x in args.families.split(",") if x.strip()}
    severity = baseline_levels(args.baseline)

    out = []
    for group in catalog.get("groups", []):
        family = group.get("id", "").upper()
        if keep and family not in keep:
            continue
        params = {p["id"]: p for p in group.get("params", [])}
        stack = list(reversed(group.get("controls", [])))
        while stack:
            c = stack.pop()
            if not withdrawn(c):
                out.append(convert(c, family, params, severity))
            if args.enhancements:
                stack.extend(reversed(c.get("controls", [])))

    text = json.dumps(out, indent=2, ensure_ascii=False) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    print(f"{len(out)} controls", file=sys.stderr)


if __name__ == "__main__":
    main()
