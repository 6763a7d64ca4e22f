from abc import ABC, abstractmethod
from pathlib import Path

from cavity_cooler.utils import atomic_write_text


class BaseWriter(ABC):
    suffix = ".csv"

    def __init__(self, out_dir, name) -> None:
        self.path = Path(out_dir) / f"{name}{self.suffix}"

    @abstractmethod
    def render(self, payload) -> str:
        pass

    def save(self, payload):
        return atomic_write_text(self.path, self.render(payload))
