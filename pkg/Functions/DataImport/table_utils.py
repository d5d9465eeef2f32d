"""Utilities para leer y escribir tablas (CSV o Excel) con pandas.DataFrame.

Funciones principales:
- read_table_to_df(file_path, sheet_name): lee un CSV o una hoja de Excel y devuelve DataFrame.
- extract_column(df, column_identifier): extrae una columna específica de un DataFrame.
- write_tables_to_excel(tables, file_path): escribe varias tablas, una por hoja.

Notas:
- Los archivos .xlsx necesitan `openpyxl` como engine.
"""
from pathlib import Path
from typing import Dict, Union

import pandas as pd

from Functions.errors import TableError

EXCEL_SUFFIXES = (".xlsx", ".xlsm")


def _check_path(file_path: Union[str, Path]) -> Path:
    if not isinstance(file_path, (str, Path)) or not str(file_path):
        raise TableError("file_path debe ser una ruta no vacía")
    path = Path(file_path)
    if not path.exists():
        raise TableError(f"Archivo no encontrado: {path}")
    return path


def read_table_to_df(file_path: Union[str, Path], sheet_name: Union[str, int] = 0) -> pd.DataFrame:
    """Lee un CSV o una hoja de un archivo Excel y devuelve un pandas.DataFrame.

    Entradas:
    - file_path: ruta al archivo (.csv, .xlsx).
    - sheet_name: nombre de la hoja (str) o índice (int); se ignora para CSV.

    Errores:
    - TableError si el archivo no existe, la extensión no es soportada o pandas falla.
    """
    path = _check_path(file_path)
    suffix = path.suffix.lower()

    try:
        if suffix == ".csv":
            return pd.read_csv(path)
        if suffix in EXCEL_SUFFIXES:
            return pd.read_excel(path, sheet_name=sheet_name, engine="openpyxl")
    except Exception as e:
        # envolver en TableError para una API más consistente
        raise TableError(f"Error leyendo '{path}' hoja '{sheet_name}': {e}") from e

    raise TableError(f"Extensión no soportada '{suffix}' (use .csv o .xlsx)")


def extract_column(df: pd.DataFrame, column_identifier: Union[str, int]) -> pd.Series:
    """Extrae una sola columna de un DataFrame pandas.

    Entradas:
    - df: pandas.DataFrame (salida de read_table_to_df)
    - column_identifier: nombre de la columna (str) o posición (int, base 0)

    Errores:
    - TableError si el DataFrame está vacío, la columna no existe, o el índice está fuera de rango
    """
    if df is None or df.empty:
        raise TableError("DataFrame está vacío o es None")

    if isinstance(column_identifier, str):
        if column_identifier not in df.columns:
            available_cols = df.columns.tolist()
            raise TableError(f"Columna '{column_identifier}' no encontrada. Columnas disponibles: {available_cols}")
        return df[column_identifier]

    if isinstance(column_identifier, int):
        if column_identifier < 0 or column_identifier >= len(df.columns):
            raise TableError(f"Índice {column_identifier} fuera de rango. DataFrame tiene {len(df.columns)} columnas (0-{len(df.columns)-1})")
        return df.iloc[:, column_identifier]

    raise TableError("column_identifier debe ser str (nombre) o int (posición)")


def write_tables_to_excel(tables: Dict[str, pd.DataFrame], file_path: Union[str, Path],
                          index: bool = False) -> Path:
    """Escribe varias tablas en un .xlsx, una hoja por clave del dict.

    Los nombres de hoja se recortan a 31 caracteres (límite de Excel).
    """
    path = Path(file_path)
    if path.suffix.lower() not in EXCEL_SUFFIXES:
        raise TableError(f"El reporte Excel debe terminar en .xlsx: {path}")
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            for sheet, df in tables.items():
                df.to_excel(writer, sheet_name=sheet[:31], index=index)
    except Exception as e:
        raise TableError(f"Error escribiendo '{path}': {e}") from e
    return path
