from pathlib import Path

DEFAULT_CONFIGURATION_FILE = (
    Path(__file__).parent / "defaults.json"
).absolute()
