from tau.predictor.base import (
    DEFAULT_STOP, HOLE, PredictorFailure, PredictRequest, PredictResponse, Sentinels, build_psm_prompt,
)
from tau.predictor.oracle import OraclePredictor
from tau.predictor.scripted import ScriptedPredictor, ScriptMiss, adversarial_predictor, greeting_script
from tau.predictor.typeparse import NoType, extract_first_type


def make_predictor(kind: str, **kw):
    """``scripted`` | ``adversarial`` | ``oracle`` | ``remote``."""
    if kind == "oracle":
        return OraclePredictor()
    if kind == "scripted":
        script = kw.get("script")
        return ScriptedPredictor(greeting_script() if script is None else script, kw.get("default"))
    if kind == "adversarial":
        return adversarial_predictor()
    if kind == "remote":
        from tau.predictor.remote import RemotePredictor
        return RemotePredictor(kw.get("endpoint"), timeout=kw.get("timeout", 30.0),
                               style=kw.get("style", "infill"))
    raise ValueError(f"unknown predictor {kind!r}")
