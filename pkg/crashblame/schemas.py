# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

## crashblame schemas (corpus records, configs, prediction logs)

schema_url = "https://json-schema.org/draft-07/schema/#"

# One line of a corpus file. Field order on disk is fixed in corpus/record.py
record_properties = {
    "stack": {"type": "array", "items": {"type": "string"}, "minItems": 1},
    "blame_index": {"type": ["integer", "null"], "minimum": 0},
    "problem_class": {"type": "string"},
    "app": {"type": "string"},
    "ts": {"type": "integer"},
}

record_schema = {
    "$schema": schema_url,
    "title": "Crash Record Schema",
    "type": "object",
    "required": ["stack", "problem_class", "app", "ts"],
    "properties": record_properties,
    "additionalProperties": False,
}

probability = {"type": "number", "minimum": 0, "maximum": 1}
weights = {
    "type": "object",
    "patternProperties": {"^[A-Za-z_][A-Za-z0-9_]*$": {"type": "number"}},
    "additionalProperties": False,
}
string_list = {"type": "array", "items": {"type": "string"}}

app_profile = {
    "type": "object",
    "required": ["name", "binaries", "methods"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "binaries": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "wrapper_binaries": string_list,
        "namespaces": string_list,
        "methods": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "crash_prone_methods": string_list,
    },
    "additionalProperties": False,
}

generator_config_schema = {
    "$schema": schema_url,
    "title": "Synthetic Corpus Generator Schema",
    "type": "object",
    "properties": {
        "apps": {"type": "array", "items": app_profile, "minItems": 1},
        "pool_weights": weights,
        "class_weights": weights,
        "depth_median": {"type": "number", "exclusiveMinimum": 0},
        "depth_sigma": {"type": "number", "minimum": 0},
        "max_depth": {"type": "integer", "minimum": 1, "maximum": 255},
        "records": {"type": "integer"},
        "seed": {"type": "integer", "minimum": 0},
        "window_days": {"type": "integer", "minimum": 1},
        "start_ts": {"type": "integer", "minimum": 0},
        "duplicate_fraction": probability,
        "offset_rate": probability,
        "skip_prefix_rate": probability,
        "deep_blame_rate": probability,
        "overflow_leaf_rate": probability,
        "crash_prone_rate": probability,
        "app_reporter_rate": probability,
        "binaries_target": {"type": "number", "minimum": 1},
    },
    "additionalProperties": False,
}

train_config_schema = {
    "$schema": schema_url,
    "title": "Training Config Schema",
    "type": "object",
    "properties": {
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "batch_size": {"type": "integer", "minimum": 1},
        "max_epochs": {"type": "integer", "minimum": 1},
        "patience": {"type": "integer", "minimum": 1},
        "dropout": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "hidden_size": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "validation_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "class_weight": {"type": "number", "minimum": 0},
        "tfidf_dim": {"type": "integer", "minimum": 1},
        "finetune_lr_scale": {"type": "number", "exclusiveMinimum": 0},
        "constrained_decoding": {"type": "boolean"},
        "logreg_c": {"type": "number", "exclusiveMinimum": 0},
        "logreg_max_iter": {"type": "integer", "minimum": 1},
        "beta1": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "beta2": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

# One line of a prediction log written by eval
prediction_schema = {
    "$schema": schema_url,
    "title": "Prediction Log Schema",
    "type": "object",
    "required": ["hash", "true_index", "predicted_index", "alpha"],
    "properties": {
        "hash": {"type": "string"},
        "true_index": {"type": ["integer", "null"]},
        "predicted_index": {"type": "integer", "minimum": 0},
        "alpha": {"type": ["array", "null"], "items": {"type": "number"}},
    },
    "additionalProperties": False,
}
