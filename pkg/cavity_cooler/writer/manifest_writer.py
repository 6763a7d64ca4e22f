from .base_writer import BaseWriter


class ManifestWriter(BaseWriter):
    """Payload: (RunConfig, version, timestamp)."""

    suffix = ".ini"

    def render(self, payload) -> str:
        run_config, version, timestamp = payload
        return run_config.to_manifest(version=version, timestamp=timestamp)
