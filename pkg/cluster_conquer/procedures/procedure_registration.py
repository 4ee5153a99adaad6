"""Decorator factory registering selection procedures by name"""
import inspect
from typing import Callable, Iterable, Optional, Tuple

from cluster_conquer.procedures.Procedure_Library import Procedure_Library

# leading positional parameters every procedure takes
PROCEDURE_ARGUMENTS = ("spec", "config")


def make_procedure_library(library_name: str) -> Tuple[Callable, Procedure_Library]:
    """
    One function may be stacked under several decorators, each binding a different engine keyword to a different name
    :return: the registering decorator and the library it fills
    """
    procedure_library: Procedure_Library = Procedure_Library(library_name)

    def procedure_decorator(name: Optional[str] = None, aliases: Iterable[str] = (), **engine_kwargs) -> Callable:
        """
        :param name: name runs and benchmark rows are reported under, else derived from the function
        :param aliases: further names that resolve to the same procedure
        :param engine_kwargs: keyword arguments fixed for this registration, typically the selection engine
        :return: decorator registering a function of (spec, config, **engine_kwargs)
        """

        def registrar(function: Callable) -> Callable:
            parameters = list(inspect.signature(function).parameters)
            assert tuple(parameters[:2]) == PROCEDURE_ARGUMENTS, \
                f"{function.__name__} must take {PROCEDURE_ARGUMENTS} first, takes {parameters}"
            procedure_library.add_procedure(function, name, tuple(aliases), **engine_kwargs)
            return function

        return registrar

    procedure_decorator.registry = procedure_library
    return procedure_decorator, procedure_library
