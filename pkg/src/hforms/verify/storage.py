"""Atomic file output for rendered results."""

import os
import shutil
import tempfile
from pathlib import Path

from loguru import logger


class ResultStore:
    """Write rendered command output to a file without leaving partial results behind."""

    def __init__(self, path: str | Path):
        """Initialize the store.

        Args:
            path: Destination file. Its parent directory is created on demand.
        """
        self.path = Path(path)

    def write(self, text: str) -> Path:
        """Write ``text`` through a temporary file in the same directory, then rename it.

        Returns:
            The destination path.

        Raises:
            IOError: If the file cannot be written.
        """
        self.path.parent.mkdir(parents=True, exist_ok=True)
        temp_file = None
        try:
            with tempfile.NamedTemporaryFile(
                mode="w",
                encoding="utf-8",
                dir=self.path.parent,
                delete=False,
                suffix=".tmp",
            ) as f:
                temp_file = f.name
                f.write(text)
                if not text.endswith("\n"):
                    f.write("\n")
                f.flush()
                os.fsync(f.fileno())

            shutil.move(temp_file, self.path)
            temp_file = None
            logger.debug(f"Wrote result to {self.path}")
            return self.path

        except Exception as e:
            if temp_file and os.path.exists(temp_file):
                os.unlink(temp_file)
            logger.exception(f"Failed to write {self.path}")
            raise IOError(f"Failed to write result: {e}") from e
