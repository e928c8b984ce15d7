"""Regenerate the canned LLM transcripts for the llm corpus.

Runs the real inference pipeline with a scripted completion function that
answers every prompt with the gold invariant's atomic clauses for the
program being analyzed, and records {prompt_hash: response} so later runs
with `--mock` replay the exact exchange.

Usage: python tools/make_transcripts.py [corpus/llm] [transcripts.json]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from pathinv import candidates
from pathinv.candidates import GeneratorBudget, LlmConfig, prompt_key
from pathinv.frontend.parser import parse_program
from pathinv.frontend.printer import expr_to_str
from pathinv.logic import boolean_atoms
from pathinv.smt import Solver, discover_solver
from pathinv.summarize import run_pipeline


def scripted_response(program) -> str:
    lines = []
    for a in program.annotations:
        if a.kind == "gold_invariant":
            for atom in boolean_atoms(a.formula):
                lines.append(expr_to_str(atom))
    body = "\n".join(dict.fromkeys(lines))  # dedup, keep order
    return f"Here are candidate clauses:\n```\n{body}\n```\n"


def main():
    corpus = Path(sys.argv[1] if len(sys.argv) > 1 else "corpus/llm")
    out_path = corpus / (sys.argv[2] if len(sys.argv) > 2 else "transcripts.json")
    transcripts: dict[str, str] = {}
    real_complete = candidates._complete

    for path in sorted(corpus.glob("*.mc")):
        text = path.read_text()
        program = parse_program(text)
        response = scripted_response(program)

        def record(prompt: str, cfg):
            transcripts[prompt_key(prompt)] = response
            return response

        candidates._complete = record
        try:
            _, report = run_pipeline(program, text, "llm", GeneratorBudget(),
                                     Solver(discover_solver()),
                                     LlmConfig("mock:unused"),
                                     program_name=path.stem)
        finally:
            candidates._complete = real_complete
        print(f"{path.stem}: {report.status} "
              f"({len(transcripts)} transcripts so far)")

    out_path.write_text(json.dumps(transcripts, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
