# provider/ciuav.py
"""命令行运行时：读取 ciuav.yaml 声明的命令 yaml，生成子命令并分发到命令类"""
from __future__ import annotations

import argparse
import importlib
import inspect
import json
import logging
import sys
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ValidationError

from csi_core.errors import ConfigError, InputError
from sensornet.simulation import SimulationInterrupted
from tools.base import Command, CommandContext, Output, OutputKind
from utils.config_loader import load_run_config

logger = logging.getLogger('ciuav')

ROOT = Path(__file__).resolve().parent.parent

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class ParameterDeclaration(BaseModel):
    name: str
    type: str = 'string'
    required: bool = False
    default: Any = None
    integer: bool = False
    min: float | None = None
    max: float | None = None
    options: list[dict[str, Any]] = []
    human_description: dict[str, str] = {}


class CommandDeclaration(BaseModel):
    name: str
    description: str
    parameters: list[ParameterDeclaration]
    source: str


def _load_yaml(path: Path) -> dict:
    with path.open('r', encoding='utf-8') as f:
        return yaml.safe_load(f)


def load_command_declarations(cli_yaml: Path) -> list[CommandDeclaration]:
    listing = _load_yaml(cli_yaml)
    declarations = []
    for command_path in listing['tools']:
        data = _load_yaml(ROOT / command_path)
        description = data.get('description', {}).get('human', {})
        declarations.append(CommandDeclaration(
            name=data['identity']['name'],
            description=description.get('en_US', ''),
            parameters=data.get('parameters') or [],
            source=data['extra']['python']['source'],
        ))
    return declarations


def _bounded(declaration: ParameterDeclaration):
    def convert(text: str):
        try:
            value = int(text) if declaration.integer else float(text)
        except ValueError:
            kind = '整数' if declaration.integer else '数值'
            raise argparse.ArgumentTypeError(f"{text!r} 不是合法的{kind}")
        if declaration.min is not None and value < declaration.min:
            raise argparse.ArgumentTypeError(f"{declaration.name} 必须 >= {declaration.min:g}，实际为 {text}")
        if declaration.max is not None and value > declaration.max:
            raise argparse.ArgumentTypeError(f"{declaration.name} 必须 <= {declaration.max:g}，实际为 {text}")
        return value
    return convert


def _add_parameter(parser: argparse.ArgumentParser, declaration: ParameterDeclaration) -> None:
    flag = '--' + declaration.name.replace('_', '-')
    kwargs: dict[str, Any] = {
        'dest': declaration.name,
        'help': declaration.human_description.get('en_US'),
        'default': declaration.default,
    }
    if declaration.type == 'boolean':
        kwargs['action'] = argparse.BooleanOptionalAction
    else:
        kwargs['required'] = declaration.required
        if declaration.type == 'number':
            kwargs['type'] = _bounded(declaration)
        elif declaration.type == 'select':
            kwargs['choices'] = [str(option['value']) for option in declaration.options]
    parser.add_argument(flag, **kwargs)


def _load_command_class(source: str) -> type[Command]:
    module_name = source.removesuffix('.py').replace('/', '.')
    module = importlib.import_module(module_name)
    for _, obj in inspect.getmembers(module, inspect.isclass):
        if issubclass(obj, Command) and obj is not Command and obj.__module__ == module.__name__:
            return obj
    raise ValueError(f"{source} 中没有找到命令类")


class CiuavCli:
    def __init__(self, cli_yaml: Path | None = None):
        declarations = load_command_declarations(cli_yaml or ROOT / 'provider' / 'ciuav.yaml')
        self.declarations = {d.name: d for d in declarations}

    def build_parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('--config', help='YAML run configuration (see GUIDE.md)')
        common.add_argument('--seed', type=int, help='global seed, overrides the config file')
        common.add_argument('--out-dir', dest='out_dir', default='out', help='directory for results and reports')
        common.add_argument('--verbosity', choices=['debug', 'info', 'warning', 'error'], default='info')

        parser = argparse.ArgumentParser(prog='ciuav', description='CSI-based indoor UAV localization toolkit')
        subparsers = parser.add_subparsers(dest='command', required=True)
        for name, declaration in self.declarations.items():
            sub = subparsers.add_parser(name, parents=[common], help=declaration.description,
                                        description=declaration.description)
            for parameter in declaration.parameters:
                _add_parameter(sub, parameter)
        return parser

    def run(self, argv: list[str] | None = None) -> int:
        parser = self.build_parser()
        try:
            parsed = parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_USAGE

        logging.basicConfig(
            level=getattr(logging, parsed.verbosity.upper()),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        declaration = self.declarations[parsed.command]
        args = {p.name: getattr(parsed, p.name) for p in declaration.parameters}

        try:
            config = load_run_config(parsed.config)
            seed = config.seed if parsed.seed is None else parsed.seed
            out_dir = Path(parsed.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            context = CommandContext(config=config, seed=seed, out_dir=out_dir, config_path=parsed.config)
            command = _load_command_class(declaration.source)(context)
            for output in command.execute(args):
                self._emit(output, out_dir)
        except (ConfigError, InputError, FileNotFoundError, ValidationError) as e:
            logger.error(str(e))
            sys.stderr.write(f"error: {e}\n")
            return EXIT_USAGE
        except (KeyboardInterrupt, SimulationInterrupted):
            sys.stderr.write("interrupted: state flushed, output is partial\n")
            return EXIT_FAILURE
        except Exception as e:
            logger.exception(f"{parsed.command} 执行失败")
            sys.stderr.write(f"error: {e}\n")
            return EXIT_FAILURE
        return EXIT_OK

    def _emit(self, output: Output, out_dir: Path) -> None:
        if output.kind == OutputKind.TEXT:
            sys.stdout.write(output.body + '\n')
        elif output.kind == OutputKind.RECORD:
            sys.stdout.write(json.dumps(output.body, ensure_ascii=False, indent=2, sort_keys=True) + '\n')
        else:
            path = out_dir / output.filename
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(output.body)
            logger.info(f"写出 {path}")
