#!/usr/bin/env python

"""tools.py  :  Run any semantic relatedness operation (augment, train, eval, sweep, crosslingual, gradcheck, report) """

__version__ = "0.1"
__status__ = "development"

# Import packages
import argparse
import sys
from source import commands, config, log_functions
from source.errors import SemrelError

OPERATIONS = ["augment", "train", "eval", "sweep", "crosslingual", "gradcheck", "report"]
NEEDS_DATA = ["augment", "train", "eval", "sweep", "crosslingual"]

# Functions
def print_help():
    print('USAGE:', file=sys.stderr)
    print('python3 tools.py <operation> [--config PATH] [--seed N] [--out DIR] [--section.key VALUE ...]', file=sys.stderr)
    print(f'Operations: {", ".join(OPERATIONS)}', file=sys.stderr)
    print('Defaults are documented in conf.py, a JSON config file overrides them.', file=sys.stderr)

def build_parser():
    # Global flags are accepted after every operation name
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="overrides seed")
    common.add_argument("--out", help="overrides out (output directory)")

    parser = argparse.ArgumentParser(prog="tools.py", description="Semantic textual relatedness tools.", allow_abbrev=False)
    subparsers = parser.add_subparsers(dest="operation")

    subparsers.add_parser("augment", parents=[common], allow_abbrev=False,
                          help="translate and augment the training data")

    train = subparsers.add_parser("train", parents=[common], allow_abbrev=False, help="train TranSem or FineSem")
    train.add_argument("--fixed-epoch", type=int, help="select this FineSem epoch instead of the best on dev")

    evaluate = subparsers.add_parser("eval", parents=[common], allow_abbrev=False, help="predict and score one dataset")
    evaluate.add_argument("--checkpoint", required=True)
    evaluate.add_argument("--lang", required=True)
    evaluate.add_argument("--split", default="test", choices=["dev", "test"])
    evaluate.add_argument("--model-name", help="model name in the result row (default: checkpoint directory name)")

    sweep = subparsers.add_parser("sweep", parents=[common], allow_abbrev=False, help="batch size or pooling sweep")
    sweep.add_argument("--axis", required=True, choices=list(commands.SWEEP_AXES))

    crosslingual = subparsers.add_parser("crosslingual", parents=[common], allow_abbrev=False,
                                         help="score languages with the routed FineSem model")
    crosslingual.add_argument("--registry", required=True)
    crosslingual.add_argument("--langs", nargs="*", default=[])

    subparsers.add_parser("gradcheck", parents=[common], allow_abbrev=False, help="finite-difference gradient check")

    report = subparsers.add_parser("report", parents=[common], allow_abbrev=False, help="table of the stored results")
    report.add_argument("--csv", action="store_true", help="long CSV form instead of the table")

    return parser

def resolve_config(args, extra_args):
    """
    conf.py defaults <- JSON file <- --seed/--out <- dotted overrides.
    """
    overrides = config.overrides_from_args(extra_args)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if getattr(args, "fixed_epoch", None) is not None:
        overrides["finesem.fixed_epoch"] = args.fixed_epoch

    run_config = config.load_config(args.config, overrides)
    return config.validate_config(run_config, require_data=args.operation in NEEDS_DATA)

def run_operation(args, run_config):
    """
    Run the requested operation. Returns the exit code.
    """
    if args.operation == 'augment':
        commands.cmd_augment(run_config)

    elif args.operation == 'train':
        commands.cmd_train(run_config)

    elif args.operation == 'eval':
        commands.cmd_eval(run_config, args.checkpoint, args.lang, args.split, args.model_name)

    elif args.operation == 'sweep':
        commands.cmd_sweep(run_config, args.axis)

    elif args.operation == 'crosslingual':
        commands.cmd_crosslingual(run_config, args.registry, args.langs)

    elif args.operation == 'gradcheck':
        if not commands.cmd_gradcheck(run_config):
            log_functions.print_log("Gradient check failed.")
            return 1

    elif args.operation == 'report':
        commands.cmd_report(run_config, as_csv=args.csv)

    return 0

def main(argv=None):
    parser = build_parser()
    args, extra_args = parser.parse_known_args(argv)

    if args.operation is None:
        # Nothing asked, print help message
        print_help()
        return 2

    try:
        run_config = resolve_config(args, extra_args)
        log_functions.print_log(f'Operation: {args.operation}')
        log_functions.print_log(f'Output directory: {run_config["out"]}')
        return run_operation(args, run_config)
    except SemrelError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

if __name__ == "__main__":
    sys.exit(main())
