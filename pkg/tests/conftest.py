from __future__ import annotations

from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
MINI_CORPUS = Path(__file__).parent.parent / "src" / "tau" / "data" / "mini_corpus"

GREETING = (FIXTURES / "greeting.mts").read_text()

# the selected candidate for the greeting example
GREETING_TYPED = '''let greeting: string = "Hello";
let suffix: string = "!";
// Produces a greeting for the given name
const hello = (name: string): string => {
  return greeting + " " + name;
};
function helloGen(name: string): () => string {
  const helloHelper = (): string => {
    return hello(name) + suffix;
  };
  return helloHelper;
}
'''

SUM_THREE = (FIXTURES / "sumThree.mts").read_text()


@pytest.fixture
def greeting() -> str:
    return GREETING


@pytest.fixture
def greeting_typed() -> str:
    return GREETING_TYPED
