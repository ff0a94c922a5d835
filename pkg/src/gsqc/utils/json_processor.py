"""JSON and CSV artifact processing utilities."""

import csv
import io
import json
import os
from typing import Any, Optional, Sequence

import aiofiles
import numpy as np
from pydantic import BaseModel, ValidationError

from ..exceptions import CircuitError, PathCertificateError
from ..models.circuit import Circuit
from ..models.graphs import SignedFunction, Vertex
from ..models.operators import SparseOperator


def _round(value: Any) -> Any:
    """Floats to 15 significant digits, recursively; numpy scalars become Python numbers."""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return str(value)
        return float(f"{value:.15g}")
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def format_cell(value: Any) -> str:
    """CSV cell text: 15 significant digits for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.15g}"
    return str(value)


class JSONProcessor:
    """JSON/CSV processor for circuits, signed functions and run reports."""

    async def save_json(self, data: Any, output_path: str) -> str:
        """Write a model or plain data as indented JSON with rounded floats."""
        if isinstance(data, BaseModel):
            data = data.model_dump(mode='json')
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        async with aiofiles.open(output_path, 'w', encoding='utf-8') as file:
            await file.write(json.dumps(_round(data), indent=2, ensure_ascii=False) + "\n")
        return output_path

    async def load_json(self, json_file_path: str) -> Any:
        """Load JSON data from a file."""
        if not os.path.exists(json_file_path):
            raise FileNotFoundError(f"JSON file not found: {json_file_path}")
        async with aiofiles.open(json_file_path, 'r', encoding='utf-8') as file:
            content = await file.read()
        return json.loads(content)

    async def save_circuit_json(self, circuit: Circuit, output_path: str) -> str:
        return await self.save_json(circuit.to_json_dict(), output_path)

    async def load_circuit_json(self, json_file_path: str) -> Circuit:
        """Load and validate a circuit; schema errors become CircuitError."""
        try:
            data = await self.load_json(json_file_path)
        except json.JSONDecodeError as e:
            raise CircuitError(f"malformed circuit JSON: {e}") from e
        try:
            return Circuit.model_validate(data)
        except ValidationError as e:
            raise CircuitError(f"invalid circuit JSON: {e.error_count()} errors, first: {e.errors()[0]['msg']}") from e

    async def load_signed_function(self, json_file_path: str,
                                   vertices: Optional[Sequence[Vertex]] = None) -> SignedFunction:
        """Signed function from {"vertices": [[...], ...], "values": [...]}.

        Without a vertex list in the file the values are taken in the order of `vertices`.
        """
        data = await self.load_json(json_file_path)
        values = [float(v) for v in data["values"]]
        if "vertices" in data:
            listed = [tuple(int(c) for c in v) for v in data["vertices"]]
            if len(listed) != len(values):
                raise PathCertificateError("vertex and value lists differ in length")
            return SignedFunction.from_mapping(dict(zip(listed, values)))
        if vertices is None:
            raise PathCertificateError("the file lists no vertices and no graph was given")
        if len(vertices) != len(values):
            raise PathCertificateError(f"{len(values)} values for {len(vertices)} vertices")
        return SignedFunction(tuple(vertices), np.array(values))

    async def save_csv(self, header: Sequence[str], rows: Sequence[Sequence[Any]], output_path: str) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        async with aiofiles.open(output_path, 'w', encoding='utf-8') as file:
            await file.write(buffer.getvalue())
        return output_path

    async def save_operator_dump(self, op: SparseOperator, output_path: str) -> str:
        """Text dump: "dim,nnz" header then "row,col,re,im" lines."""
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        async with aiofiles.open(output_path, 'w', encoding='utf-8') as file:
            await file.write("\n".join(op.dump_lines()) + "\n")
        return output_path

    async def get_all_json_files(self, directory: str) -> list[str]:
        """Get all JSON files in a directory."""
        if not os.path.exists(directory):
            raise FileNotFoundError(f"Directory not found: {directory}")
        return sorted(os.path.join(directory, f) for f in os.listdir(directory) if f.endswith('.json'))
