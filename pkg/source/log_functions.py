#!/usr/bin/env python

""" log_functions.py  :  Generate meta information about the process """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import hashlib
import json
import os
import re
import sys
from datetime import datetime
from deepdiff import DeepDiff


def print_log(message):
    """
    Print a progress or diagnostic message. Everything human-readable goes to stderr,
    stdout is reserved for data.
    """
    print(message, file=sys.stderr, flush=True)

def insert_log(out_dir, name, method, operation, config):
    """
    Generate a log document with information about the process inside the output directory.
    The record holds no timestamp so that reruns with the same config are byte-identical.
    """
    process_info = {
        "process_id": process_digest(config),
        "name": name,
        "operation": operation,
        "method": method,
        "config": config,
    }

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "log_details.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(process_info, f, indent=2, sort_keys=True)
        f.write("\n")

    # The date only goes to the console
    print_log(f"Process {process_info['process_id']} ({operation}) started {datetime.now().strftime('%Y-%m-%dT%H:%M:%S')}")

    return process_info["process_id"]

def process_digest(config):
    """
    Stable identifier of a resolved configuration.
    """
    payload = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]

def diff_entry(expected, found):
    """
    Compare two (possibly nested) dictionaries and return one entry per field that differs.
    Fields missing on one side are reported with "Non-existing".
    """
    flat_expected = flatten_dict(expected)
    flat_found = flatten_dict(found)

    diff = DeepDiff(flat_expected, flat_found, ignore_numeric_type_changes=True)

    modified_fields = []

    # Changed values and changed types are reported the same way
    for change_kind in ("values_changed", "type_changes"):
        for path, change in diff.get(change_kind, {}).items():
            modified_fields.append({"field": _field_from_path(path), "expected": change["old_value"], "found": change["new_value"]})

    for path in diff.get("dictionary_item_removed", []):
        field = _field_from_path(path)
        modified_fields.append({"field": field, "expected": flat_expected[field], "found": "Non-existing"})

    for path in diff.get("dictionary_item_added", []):
        field = _field_from_path(path)
        modified_fields.append({"field": field, "expected": "Non-existing", "found": flat_found[field]})

    return sorted(modified_fields, key=lambda entry: entry["field"])

def _field_from_path(path):
    # DeepDiff paths look like root['tokenizer.vocab_size']
    match = re.match(r"root\['(.*)'\]$", path)
    return match.group(1) if match else path

def flatten_dict(d, parent_key='', sep='.'):
    """
    Recursively flattens a nested dictionary using dot notation.
    Example: {'a': {'b': 1}} => {'a.b': 1}
    """
    items = []
    # If the value is a dictionary, recursively flatten it
    # Otherwise append the key-value pair to the items list
    for k, v in d.items():
        new_key = f"{parent_key}{sep}{k}" if parent_key else k
        if isinstance(v, dict) and v:
            items.extend(flatten_dict(v, new_key, sep=sep).items())
        else:
            items.append((new_key, v))
    return dict(items)

def natural_sort_key(s):
    """
    Sort key that orders embedded numbers numerically (epoch-2 before epoch-10).
    """
    return [int(text) if text.isdigit() else text.lower() for text in re.split('([0-9]+)', s)]
