"""
模型文件存储

fit 阶段写出、backtest / simulate 阶段读取的 JSON 文件：
marginals.json（各序列的边缘模型）与 vine.json（结构、族与驱动系数）。
每个文件都带 format_version，版本不一致时拒绝读取。
"""

import json
from pathlib import Path
from typing import Any

from loguru import logger

from ..marginals.arfima_garch import MarginalFit
from ..vine.fitting import FORMAT_VERSION, FittedTVVine
from .errors import ArtifactError

MARGINALS_FILE = "marginals.json"
VINE_FILE = "vine.json"


class ArtifactStore:
    """
    输出目录下的模型文件存储

    浮点数按 JSON 的 float repr 写出，读回后与内存中的值完全一致。
    """

    def __init__(self, out_dir: Path | str):
        """
        Args:
            out_dir: 输出目录，写入时自动创建
        """
        self.out_dir = Path(out_dir)

    @property
    def marginals_path(self) -> Path:
        return self.out_dir / MARGINALS_FILE

    @property
    def vine_path(self) -> Path:
        return self.out_dir / VINE_FILE

    def exists(self) -> bool:
        """两个模型文件是否都已存在"""
        return self.marginals_path.exists() and self.vine_path.exists()

    # ------------------------------------------------------------------

    def _write(self, path: Path, payload: dict[str, Any]) -> Path:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(payload, indent=1), encoding="utf-8")
        except OSError as e:
            raise ArtifactError(f"cannot write {path}: {e}", path=str(path)) from e
        logger.debug(f"已写入 {path}")
        return path

    def _read(self, path: Path) -> dict[str, Any]:
        if not path.exists():
            raise ArtifactError(
                f"artifact not found: {path}; run 'fit' first", path=str(path)
            )
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ArtifactError(f"cannot read {path}: {e}", path=str(path)) from e
        version = payload.get("format_version")
        if version != FORMAT_VERSION:
            raise ArtifactError(
                f"{path.name} has format version {version}, expected {FORMAT_VERSION}",
                path=str(path),
                version=version,
            )
        return payload

    # ------------------------------------------------------------------

    def save_marginals(
        self, fits: list[MarginalFit], pit_mode: str, dates: list[str] | None = None
    ) -> Path:
        """写出各序列的边缘模型"""
        payload = {
            "format_version": FORMAT_VERSION,
            "pit_mode": pit_mode,
            "dates": list(dates or []),
            "series": [fit.to_dict() for fit in fits],
        }
        return self._write(self.marginals_path, payload)

    def load_marginals(self) -> tuple[list[MarginalFit], str]:
        """
        读取边缘模型

        Returns:
            (各序列的 MarginalFit, PIT 模式)

        Raises:
            ArtifactError: 文件缺失、损坏或版本不一致
        """
        payload = self._read(self.marginals_path)
        try:
            fits = [MarginalFit.from_dict(item) for item in payload["series"]]
        except (KeyError, TypeError, ValueError) as e:
            raise ArtifactError(
                f"malformed marginal fit in {self.marginals_path}: {e}",
                path=str(self.marginals_path),
            ) from e
        return fits, str(payload.get("pit_mode", "empirical"))

    def save_vine(self, fitted: FittedTVVine) -> Path:
        """写出 Vine 结构、族与驱动系数"""
        return self._write(self.vine_path, fitted.to_dict())

    def load_vine(self) -> FittedTVVine:
        """
        读取 Vine；参数路径需再用 filter_paths 计算

        Raises:
            ArtifactError: 文件缺失、损坏或版本不一致
        """
        payload = self._read(self.vine_path)
        try:
            return FittedTVVine.from_dict(payload)
        except (KeyError, TypeError, ValueError) as e:
            raise ArtifactError(
                f"malformed vine artifact {self.vine_path}: {e}",
                path=str(self.vine_path),
            ) from e
