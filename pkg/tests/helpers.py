import json
from importlib import resources

GOLDEN = json.loads((resources.files("cvmdi") / "data" / "golden.json").read_text())
