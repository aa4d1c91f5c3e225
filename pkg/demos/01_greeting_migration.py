"""Migrate a small untyped program with hand-scripted type predictions.

The program has five annotation sites that a model fills and two variable
declarations that local inference fills. The script offers two answers for
the return type of ``helloGen``; both type check, and the more descriptive
one wins on typedness.
"""

from tau.block_tree import build_tree, format_tree
from tau.lang.parser import parse
from tau.predictor import ScriptedPredictor, greeting_script
from tau.search.config import SearchConfig
from tau.search.engine import migrate

SOURCE = '''let greeting = "Hello";
let suffix = "!";
// Produces a greeting for the given name
const hello = (name) => {
  return greeting + " " + name;
};
function helloGen(name) {
  const helloHelper = () => {
    return hello(name) + suffix;
  };
  return helloHelper;
}
'''


def main():
    # The search walks this tree bottom-up: innermost declarations first.
    print(format_tree(build_tree(parse(SOURCE))))

    result = migrate(SOURCE, ScriptedPredictor(greeting_script()), SearchConfig(mode="tree"))
    print("visit order:", " -> ".join(result.order))

    for i, cand in enumerate(result.all):
        print(f"\ncandidate {i}: {cand.type_errors} type errors, typedness {cand.score:.1f}")
        print(cand.text)

    print("chosen:")
    print(result.best.text)


if __name__ == "__main__":
    main()
