"""Build fill-in-the-type training text from one typed function.

Each annotation becomes a middle span. The prefix keeps earlier types, and
most of the time the suffix loses its annotations so the model cannot copy
them.
"""

import random

from tau.fit_prep import PSM, SPM, Spans, format_example, reconstruct, split_at_site, strip_suffix_annotations
from tau.lang.parser import parse
from tau.lang.sites import find_annotation_sites

SOURCE = "function sumThree(a: number, b: number, c: number): number {\n  return a + b + c;\n}"


def main():
    program = parse(SOURCE)
    sites = find_annotation_sites(program)
    print(f"{len(sites)} annotation sites:", [str(s.key) for s in sites])

    spans = split_at_site(program, 1)
    print("prefix:", repr(spans.prefix))
    print("middle:", repr(spans.middle))

    rng = random.Random(0)
    suffix, stripped = strip_suffix_annotations(spans.suffix, sites[2:], rng,
                                                len(spans.prefix) + len(spans.middle))
    ex = Spans(spans.prefix, spans.middle, suffix)
    print("suffix stripped:", stripped)
    print("\nPSM:", format_example(ex, PSM))
    print("SPM:", format_example(ex, SPM))

    # Unstripped examples decode back to the exact source bytes.
    whole = format_example(spans, PSM)
    assert reconstruct(whole, PSM) == SOURCE
    print("\nreconstruction ok")


if __name__ == "__main__":
    main()
