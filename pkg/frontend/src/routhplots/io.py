"""CSV loading against the documented routhsim output schema."""

import pandas as pd


class SchemaError(Exception):
    """Input CSV does not match the expected column layout."""


def load_table(path, required):
    """Read one CSV and check the required columns are present and non-empty.

    Parameters
    ----------
    path : str or Path
        CSV file with a header row.
    required : sequence of str
        Column names the caller is going to use.

    Returns
    -------
    pandas.DataFrame
    """
    try:
        df = pd.read_csv(path)
    except FileNotFoundError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{path}: empty CSV") from exc
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing} "
                          f"(have {list(df.columns)})")
    if len(df) == 0:
        raise SchemaError(f"{path}: no data rows")
    return df
