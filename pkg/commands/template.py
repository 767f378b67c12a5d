"""template: write example problem files to a directory"""
import json
import logging
from pathlib import Path

from commands import finish, settings_from_args
from utils.data_manager import read_json, validate_problem
from utils.sample_data import get_sample_problems

logger = logging.getLogger(__name__)

# example file -> command it is meant for
TEMPLATE_COMMANDS = {
    "scalar_two_point": "extend",
    "vector_two_point": "extend",
    "c0_two_point": "extend",
    "c_tails": "extend",
    "ck_three_point": "ck-extend",
    "linf_partition": "partition",
    "counterexample": None,
}


def run(args):
    settings = settings_from_args(args)
    directory = Path(args.directory)
    directory.mkdir(parents=True, exist_ok=True)

    written, checks = [], {}
    for stem, problem in get_sample_problems().items():
        path = directory / f"{stem}.json"
        path.write_text(json.dumps(problem, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append({"file": path.name, "command": TEMPLATE_COMMANDS.get(stem)})
        command = TEMPLATE_COMMANDS.get(stem)
        if command is not None:
            is_valid, message, _ = validate_problem(read_json(path), command)
            checks[stem] = {"message": message, "ok": is_valid}
    logger.info("Wrote %d example problems to %s", len(written), directory)
    return finish("template", args, None, {"directory": str(directory), "files": written}, checks, settings)
