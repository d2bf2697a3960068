"""Synthetic benchmark generator with known ground truth.

Each generated bug report shares a rare planted term with exactly one
source file, so a correct ranker puts that file first. Optionally one
"decoy" query is planted in the first project: its strongest term is rare
inside that project but saturates every other project's files, so a
locally trained IDF is fooled by the decoy file while a globally trained
IDF zeroes the term out and finds the real fix location.

The trees this module writes follow the canonical corpus layout and load
with :func:`bugloc.corpus.load_benchmark`.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from . import porter

_CONSONANTS = "bdfgjklmnprtvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class SynthSpec:
    projects: int = 3
    files_per_project: int = 10
    reports_per_project: int = 12
    plant_decoy: bool = True
    seed: int = 7


class _Words:
    """Made-up identifiers with pairwise distinct Porter stems."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used_stems = {""}

    def fresh(self) -> str:
        while True:
            word = "".join(
                self.rng.choice(_CONSONANTS) + self.rng.choice(_VOWELS)
                for _ in range(3)
            ) + self.rng.choice("kprtx")
            stem = porter.stem(word)
            if stem not in self.used_stems:
                self.used_stems.add(stem)
                return word


def _java_file(class_name: str, rare: str, pair: str, filler: list[str],
               noise_literal: str | None) -> str:
    lines = [
        "package bench;",
        "",
        "// generated fixture; the comment text below must never be indexed",
        "// noisewordalpha noisewordbeta",
        f"public class {class_name} {{",
        f"    private int {rare};",
        f"    private int {pair};",
    ]
    if noise_literal:
        lines.append(f'    private String banner = "{noise_literal}";')
    lines += [
        "    public int refresh() {",
        f"        {rare} = {rare} + {pair};",
        f"        return {rare};",
        "    }",
    ]
    for word in filler:
        lines.append(f"    public void {word}() {{ {word} = 0; }}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _report_json(bug_id: str, rare: str, pair: str, fixed: list[str],
                 stamp: str) -> dict:
    return {
        "id": bug_id,
        "summary": f"Crash when {rare} overflows",
        "description": (
            f"Invoking {rare} with a large {pair} makes {rare} throw an "
            "unexpected exception and the whole screen freezes afterwards."
        ),
        "fixed_files": fixed,
        "open_date": stamp,
    }


def generate_benchmark(root_path, spec: SynthSpec = SynthSpec()) -> dict:
    """Write a benchmark tree under ``root_path``; returns planted metadata.

    The returned dict maps ``planted`` (project, bug_id) -> file id, and
    lists any ``decoy`` queries with their true and decoy files.
    """
    root = Path(root_path)
    rng = random.Random(spec.seed)
    words = _Words(rng)

    decoy_term = words.fresh() if spec.plant_decoy else None
    signal_term = words.fresh() if spec.plant_decoy else None
    shared_filler = [words.fresh() for _ in range(4)]

    planted: dict[tuple[str, str], str] = {}
    decoy_meta = []
    manifest_rows = []

    for p in range(spec.projects):
        project = f"proj{p + 1}"
        sources = root / project / "sources" / "core"
        bugs = root / project / "bugs"
        sources.mkdir(parents=True, exist_ok=True)
        bugs.mkdir(parents=True, exist_ok=True)

        rares = [words.fresh() for _ in range(spec.files_per_project)]
        pairs = [words.fresh() for _ in range((spec.files_per_project + 1) // 2)]
        file_ids = []
        for i, rare in enumerate(rares):
            class_name = rare.capitalize()
            # plant the next file's rare term inside a string literal: it
            # must be invisible to the pipeline or rankings would smear
            neighbour = rares[(i + 1) % len(rares)]
            filler = shared_filler * (1 + i % 3)
            if p > 0 and decoy_term:
                filler = filler + [decoy_term]
            body = _java_file(class_name, rare, pairs[i // 2], filler,
                              noise_literal=neighbour)
            path = sources / f"{class_name}.java"
            path.write_text(body, "utf-8")
            file_ids.append(f"core/{class_name}.java")

        n_reports = spec.reports_per_project
        for r in range(n_reports):
            target = r % spec.files_per_project
            bug_id = f"BUG-{project}-{r + 1:03d}"
            stamp = f"2021-{1 + r // 28:02d}-{1 + r % 28:02d}T00:00:00"
            report = _report_json(bug_id, rares[target], pairs[target // 2],
                                  [file_ids[target]], stamp)
            (bugs / f"{bug_id}.json").write_text(json.dumps(report, indent=2), "utf-8")
            planted[(project, bug_id)] = file_ids[target]

        extra = 0
        if p == 0 and spec.plant_decoy:
            decoy_file = "core/Decoyhome.java"
            true_file = "core/Truehome.java"
            (sources / "Decoyhome.java").write_text(
                _java_file("Decoyhome", decoy_term, decoy_term, [decoy_term], None), "utf-8")
            (sources / "Truehome.java").write_text(
                _java_file("Truehome", signal_term, signal_term, [signal_term], None), "utf-8")
            bug_id = f"BUG-{project}-decoy"
            report = {
                "id": bug_id,
                "summary": f"Regression around {decoy_term} handling",
                "description": (
                    f"The {decoy_term} path stalls; {decoy_term} retries then "
                    f"the {signal_term} stage never completes."
                ),
                "fixed_files": [true_file],
                "open_date": "2021-12-31T00:00:00",
            }
            (bugs / f"{bug_id}.json").write_text(json.dumps(report, indent=2), "utf-8")
            planted[(project, bug_id)] = true_file
            decoy_meta.append({"project": project, "bug_id": bug_id,
                               "true_file": true_file, "decoy_file": decoy_file})
            extra = 1

        n_files = spec.files_per_project + (2 if p == 0 and spec.plant_decoy else 0)
        manifest_rows.append(f"{project},{n_files},{n_reports + extra}")

    (root / "manifest.csv").write_text(
        "project,source_files,bug_reports\n" + "\n".join(manifest_rows) + "\n", "utf-8")
    return {"planted": planted, "decoy": decoy_meta}
