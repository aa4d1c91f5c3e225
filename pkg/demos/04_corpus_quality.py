"""Score the bundled corpus the way a training set would be curated.

Every file passes the hard filters or is rejected with a reason; survivors
get a weighted quality score and files well below the mean are dropped.
"""

from importlib import resources

from tau.corpus import SourceFile, build_corpus


def main():
    root = resources.files("tau") / "data" / "mini_corpus"
    files = [SourceFile(p.name, p.read_text()) for p in sorted(root.iterdir()) if p.name.endswith(".mts")]
    result = build_corpus(files)
    manifest = result.manifest()

    for row in manifest["rejected"]:
        print(f"rejected {row['path']}: {row['reason']}")
    print(f"kept {len(manifest['kept'])} of {len(files)}")


if __name__ == "__main__":
    main()
