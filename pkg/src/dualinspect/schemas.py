"""JSON Schemas (draft 2020-12) for everything the CLI prints as JSON."""

_NUM = {"type": "number"}
_NULLABLE_NUM = {"type": ["number", "null"]}


def _triple(item):
    return {"type": "object", "required": ["lambda", "p1", "p2"],
            "additionalProperties": False,
            "properties": {"lambda": item, "p1": item, "p2": item}}


_INTERVAL = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

ESTIMATE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "EstimateReport",
    "type": "object",
    "required": ["method", "m", "alpha", "estimates", "standard_errors", "ci", "flags"],
    "additionalProperties": False,
    "properties": {
        "method": {"enum": ["moment", "mle", "cr"]},
        "m": {"type": "integer", "minimum": 2},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "estimates": _triple(_NUM),
        "standard_errors": {"oneOf": [{"type": "null"}, _triple({"type": "number", "minimum": 0})]},
        "ci": {"oneOf": [{"type": "null"}, _triple(_INTERVAL)]},
        "flags": {"type": "array", "items": {"enum": ["P1_OUT_OF_RANGE", "P2_OUT_OF_RANGE"]}},
        "solver": {"type": "object", "required": ["iterations", "residuals"],
                   "additionalProperties": False,
                   "properties": {"iterations": {"type": "integer", "minimum": 0},
                                  "residuals": {"type": "array", "items": _NUM,
                                                "minItems": 3, "maxItems": 3}}},
        "note": {"type": "string"},
    },
}

ERROR_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Error",
    "type": "object",
    "required": ["error"],
    "additionalProperties": False,
    "properties": {
        "error": {"type": "object", "required": ["kind", "message", "exit_code"],
                  "additionalProperties": False,
                  "properties": {
                      "kind": {"enum": ["undefined_estimator", "covariance_nonpositive",
                                        "no_interior_maximum", "input_error"]},
                      "message": {"type": "string"},
                      "exit_code": {"enum": [1, 2]},
                      "rows": {"type": "array"}}},
    },
}

_ESTIMATOR = {
    "type": "object",
    "required": ["successes", "failures", "mean", "std", "bias"],
    "additionalProperties": False,
    "properties": {
        "successes": {"type": "integer", "minimum": 0},
        "failures": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
        "mean": _triple(_NULLABLE_NUM),
        "std": _triple(_NULLABLE_NUM),
        "bias": _triple(_NULLABLE_NUM),
    },
}

STUDY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "StudyReport",
    "type": "object",
    "required": ["config", "replicates", "estimators"],
    "additionalProperties": False,
    "properties": {
        "config": {
            "type": "object",
            "required": ["lambda", "p1", "p2", "m", "replicates", "seed", "methods"],
            "additionalProperties": False,
            "properties": {"lambda": _NUM, "p1": _NUM, "p2": _NUM,
                           "m": {"type": "integer", "minimum": 2},
                           "replicates": {"type": "integer", "minimum": 1},
                           "seed": {"type": "integer", "minimum": 0},
                           "methods": {"type": "array", "minItems": 1,
                                       "items": {"enum": ["moment", "mle", "cr"]}}},
        },
        "replicates": {"type": "integer", "minimum": 1},
        "estimators": {"type": "object",
                       "propertyNames": {"enum": ["moment", "mle", "cr"]},
                       "additionalProperties": _ESTIMATOR},
        "head_to_head": {"type": "object",
                         "required": ["ml_better_fraction", "ml_better", "compared"],
                         "additionalProperties": False,
                         "properties": {"ml_better_fraction": {"type": ["number", "null"],
                                                               "minimum": 0, "maximum": 1},
                                        "ml_better": {"type": "integer", "minimum": 0},
                                        "compared": {"type": "integer", "minimum": 0}}},
    },
}

TABLE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Table",
    "type": "object",
    "required": ["table", "title", "replicates", "seed", "columns", "rows"],
    "additionalProperties": False,
    "properties": {
        "table": {"enum": ["T1", "T2", "T3"]},
        "title": {"type": "string"},
        "replicates": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "columns": {"type": "array", "items": {"type": "string"}},
        "rows": {"type": "array", "items": {"type": "object"}},
        "extras": {"type": "object"},
    },
}
