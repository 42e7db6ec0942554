"""
Registry for skelpair CLI actions.

Provides decorators for registering library calls as CLI actions. Command
modules only need to decorate their functions - no CLI code needed.

Usage:
    from skelpair.registry import action, all_action

    @action("table", default=True)
    def table(*, d: int, basis: str = "fourier") -> DegreeTableReport:
        '''Emit the F-degree table.'''
        ...

    @all_action
    def all() -> int:
        '''Check the goldens of this category.'''
        ...
"""

from __future__ import annotations

from typing import Callable, TypeVar

F = TypeVar('F', bound=Callable)

# Registry: {category_name: {action_name: func}}
_actions: dict[str, dict[str, Callable]] = {}

# Self-checks: {category_name: func}
_all_funcs: dict[str, Callable] = {}

# Action run when the category is followed directly by options: {category_name: action_name}
_defaults: dict[str, str] = {}


def _category(func: Callable) -> str:
    # skelpair.commands.chow -> chow
    return func.__module__.split('.')[-1]


def action(name: str | None = None, default: bool = False):
    """
    Register a function as a CLI action.

    The function is exposed as a CLI command under its category (the last
    component of its module name). Its keyword arguments become CLI options.

    Args:
        name: Action name; defaults to the function name with underscores as dashes.
        default: Run this action when the category is followed by options only,
                 e.g. `skelpair converge --levels 2,4 ...`.
    """
    def decorator(func: F) -> F:
        category = _category(func)
        action_name = name or func.__name__.replace('_', '-')
        _actions.setdefault(category, {})[action_name] = func
        if default:
            _defaults[category] = action_name
        return func
    return decorator


def all_action(func: F) -> F:
    """
    Register a function as the 'all' self-check of a category.

    The function takes no arguments, logs one ✓ line per verified result and
    returns an exit code (0 for success).
    """
    _all_funcs[_category(func)] = func
    return func


def get_actions(category: str) -> dict[str, Callable]:
    """Get all registered actions for a category."""
    return _actions.get(category, {})


def get_all_func(category: str) -> Callable | None:
    """Get the 'all' function for a category."""
    return _all_funcs.get(category)


def get_default_action(category: str) -> str | None:
    return _defaults.get(category)


def get_categories() -> list[str]:
    """Get all registered categories, sorted."""
    return sorted(set(_actions.keys()) | set(_all_funcs.keys()))


def list_actions(category: str) -> list[str]:
    """List all available actions for a category."""
    actions = list(get_actions(category).keys())
    if category in _all_funcs:
        actions.insert(0, 'all')
    return actions
