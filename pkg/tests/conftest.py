import sys
from pathlib import Path

# make the sibling helper modules importable regardless of rootdir
sys.path.insert(0, str(Path(__file__).parent))
