"""
partition subcommand

Prints the coset / recovery table of the configured code and writes it out.
"""

import logging
from typing import Any, Dict

import pandas as pd

from ..schemas.run_config import RunConfig
from ..utils.stabilizer import coset_partition, format_partition_table, load_code
from .common import emit

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> Dict[str, Any]:
    code = load_code(config.code)
    lines = format_partition_table(code)
    for line in lines:
        print(line)

    frame = pd.DataFrame(
        [
            {
                "label": entry.label,
                "syndrome": entry.syndrome.to_string(),
                "coset": " ".join(member.label() for member in entry.coset),
                "recovery": entry.recovery.label(),
            }
            for entry in coset_partition(code).values()
        ],
        columns=["label", "syndrome", "coset", "recovery"],
    )
    return emit("partition", config, frame, {"code": code.name, "lines": lines})
