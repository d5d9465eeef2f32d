"""
Módulo DataImport: lectura y escritura de tablas CSV/XLSX.
"""

from .table_utils import (
    extract_column,
    read_table_to_df,
    write_tables_to_excel,
)

__all__ = [
    'extract_column',
    'read_table_to_df',
    'write_tables_to_excel',
]
