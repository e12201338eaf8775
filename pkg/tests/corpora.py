"""Small file builders shared by several test modules."""
from __future__ import annotations

SIX_CLASS_COUNTS = {
    "Sports": 1232,
    "Politics": 1228,
    "Technology": 1224,
    "Business": 1221,
    "Entertainment": 1205,
    "Environment": 1205,
}


def write_six_class_tsv(path, counts=SIX_CLASS_COUNTS):
    """Interleaved synthetic corpus with the given per-class record counts."""
    remaining = dict(counts)
    lines = []
    i = 0
    while any(remaining.values()):
        for label, left in remaining.items():
            if left:
                lines.append(f"{label}\t{label.lower()} tok{i % 17} w{i % 5}")
                remaining[label] = left - 1
                i += 1
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
