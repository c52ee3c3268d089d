"""
JSON input validation.

Validates sweep grid files against JSON schema and performs semantic
validation (primality, duplicate points, bracket requirements), and checks
emitted result records against the result schema.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List

import jsonschema
from gmpy2 import is_prime

from .utils import parse_rational

SCHEMA_DIR = Path(__file__).parent / "schemas"
GRID_SCHEMA = SCHEMA_DIR / "sweep-grid-schema.json"
RESULT_SCHEMA = SCHEMA_DIR / "result-schema.json"


class ValidationError(Exception):
    """Custom exception for validation errors."""

    pass


def load_schema(schema_path: Path) -> Dict[str, Any]:
    """
    Load JSON schema from file.

    Args:
        schema_path: Path to the JSON schema file

    Returns:
        Parsed JSON schema

    Raises:
        ValidationError: If schema file cannot be loaded
    """
    try:
        with open(schema_path, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ValidationError(f"Schema file not found: {schema_path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in schema file: {e}")


def load_input_file(input_path: Path) -> Dict[str, Any]:
    """
    Load input JSON file.

    Args:
        input_path: Path to the input JSON file

    Returns:
        Parsed input data

    Raises:
        ValidationError: If input file cannot be loaded
    """
    try:
        with open(input_path, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ValidationError(f"Input file not found: {input_path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in input file: {e}")


def validate_against_schema(data: Dict[str, Any], schema: Dict[str, Any]) -> None:
    """
    Validate data against JSON schema.

    Args:
        data: Input data to validate
        schema: JSON schema

    Raises:
        ValidationError: If validation fails with detailed error message
    """
    try:
        jsonschema.validate(instance=data, schema=schema)
    except jsonschema.ValidationError as e:
        path = " → ".join(str(p) for p in e.absolute_path) if e.absolute_path else "root"
        raise ValidationError(f"Schema validation failed at '{path}': {e.message}")
    except jsonschema.SchemaError as e:
        raise ValidationError(f"Invalid schema: {e.message}")


def _parse(value: Any, field: str) -> Fraction:
    try:
        return parse_rational(value)
    except ValueError as e:
        raise ValidationError(f"Invalid rational in '{field}': {e}")


def validate_primes(primes: List[int]) -> None:
    """
    Validate that every listed modulus is prime and listed once.

    Raises:
        ValidationError: If a composite or duplicate entry is found
    """
    composite = [str(p) for p in primes if not is_prime(p)]
    if composite:
        raise ValidationError(f"Not prime: {', '.join(composite)}")

    duplicates = sorted({p for p in primes if primes.count(p) > 1})
    if duplicates:
        raise ValidationError(f"Duplicate primes: {', '.join(map(str, duplicates))}")


def validate_couplings(data: Dict[str, Any]) -> List[Fraction]:
    """
    Parse the couplings and check they can be solved.

    B = 0 is rejected. Without an explicit bracket only B = 1 and B = -1 have
    a default bracket.

    Returns:
        Parsed couplings in input order

    Raises:
        ValidationError: If a coupling is zero, duplicated or needs a bracket
    """
    couplings = [_parse(b, "couplings") for b in data["couplings"]]

    if any(b == 0 for b in couplings):
        raise ValidationError("Coupling B = 0 is not supported")

    if len(set(couplings)) != len(couplings):
        raise ValidationError("Duplicate couplings (after exact normalisation)")

    if "bracket" not in data:
        unsupported = [str(b) for b in couplings if b not in (1, -1)]
        if unsupported:
            raise ValidationError(
                f"Couplings {', '.join(unsupported)} need an explicit 'bracket'"
            )
    return couplings


def validate_bracket(data: Dict[str, Any]) -> None:
    """
    Check that an explicit bracket is nonempty.

    Raises:
        ValidationError: If lo >= hi
    """
    bracket = data.get("bracket")
    if bracket is None:
        return
    lo, hi = _parse(bracket["lo"], "bracket"), _parse(bracket["hi"], "bracket")
    if not lo < hi:
        raise ValidationError(f"Bracket is empty: lo = {lo}, hi = {hi}")


def validate_grid_file(input_path: Path, schema_path: Path = GRID_SCHEMA) -> Dict[str, Any]:
    """
    Validate a sweep grid file comprehensively.

    Performs:
    1. JSON schema validation
    2. Primality and duplicate checks
    3. Coupling checks
    4. Bracket and tolerance checks

    Args:
        input_path: Path to the grid JSON file
        schema_path: Path to the JSON schema file

    Returns:
        Validated grid data

    Raises:
        ValidationError: If any validation fails
    """
    schema = load_schema(schema_path)
    data = load_input_file(input_path)

    validate_against_schema(data, schema)

    validate_primes(data["primes"])
    validate_couplings(data)
    validate_bracket(data)

    if "tolerance" in data and _parse(data["tolerance"], "tolerance") <= 0:
        raise ValidationError("Tolerance must be positive")

    truncations = data.get("truncations", [])
    if len(set(truncations)) != len(truncations):
        raise ValidationError("Duplicate truncation depths")

    return data


def validate_result_records(
    records: List[Dict[str, Any]], schema_path: Path = RESULT_SCHEMA
) -> None:
    """
    Validate emitted sweep records against the result schema.

    Raises:
        ValidationError: If any record does not conform
    """
    schema = load_schema(schema_path)
    for index, record in enumerate(records):
        try:
            validate_against_schema(record, schema)
        except ValidationError as e:
            raise ValidationError(f"Result record {index}: {e}")
