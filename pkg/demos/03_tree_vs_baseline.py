"""Compare whole-file prompting with tree decomposition on the bundled corpus.

Uses the deterministic oracle predictor, so no model or network is needed.
Takes under a minute on one core.
"""

from importlib import resources

from tau.evaluation import compare, comparison_table, run_eval
from tau.predictor import OraclePredictor
from tau.search.config import SearchConfig


def main():
    corpus = resources.files("tau") / "data" / "mini_corpus"
    baseline = run_eval(corpus, OraclePredictor(), SearchConfig(mode="baseline"))
    tree = run_eval(corpus, OraclePredictor(), SearchConfig(mode="tree", usages=True))
    print(comparison_table(compare(baseline, tree, ("baseline", "tree+usages"))))

    # Lower typedness means more informative annotations on the files that check.
    worst = sorted(tree.per_file, key=lambda r: -r.typedness)[:3]
    for r in worst:
        print(f"{r.path}: {r.typedness:.1f}")


if __name__ == "__main__":
    main()
