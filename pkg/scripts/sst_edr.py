"""
python3 sst_edr.py synth --kind ecg --rr af --mod-depth 0.1 --seed 7 -o ../logs/af_7
python3 sst_edr.py edr ../logs/af_7/ecg.csv -a ../logs/af_7/annotations.csv -o ../logs/af_7
python3 sst_edr.py eval ../logs/af_7/truth_iif.csv ../logs/af_7/if_e.csv -o ../logs/af_7
"""

import os
import sys
sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
