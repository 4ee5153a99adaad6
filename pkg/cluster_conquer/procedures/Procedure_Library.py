"""Structure for tracking selection procedures registered by name"""
import inspect
import logging
from functools import partial
from typing import Callable, Dict, Iterable, List, Optional

logger = logging.getLogger(__name__)


class Procedure:
    """
        Named procedure; calling it on a problem and a config runs the procedure with its registered keyword arguments
    """

    def __init__(self, function: Callable, name: str, **function_kwargs):
        self._function: Callable = partial(function, **function_kwargs) if function_kwargs else function
        self._name: str = name
        self.function_kwargs: Dict = dict(function_kwargs)

    @property
    def name(self) -> str:
        """
        :return: name of the procedure
        """
        return self._name

    def __call__(self, spec, config):
        return self._function(spec, config)

    def __str__(self):
        return f"procedure:{self.name}"

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return str(self)

    def __eq__(self, other):
        return hash(self) == hash(other)


class Procedure_Library:
    """Library that keeps track of all registered procedures and the aliases resolving to them"""

    def __init__(self, library_name: str):
        self._library_name = library_name
        self._procedures: Dict[str, Procedure] = {}
        self._aliases: Dict[str, str] = {}

    def resolve(self, name: str) -> str:
        """
        :param name: registered name or alias
        :return: the registered name
        :raises KeyError: unknown name, with the registered names in the message
        """
        name = self._aliases.get(name, name)
        if name not in self._procedures:
            known = ", ".join(self.names + sorted(self._aliases))
            raise KeyError(f"unknown procedure {name!r}; registered: {known}")
        return name

    def get_procedure(self, name: str) -> Procedure:
        """
        :param name: registered name or alias
        :return: the procedure
        :raises KeyError: unknown name, with the registered names in the message
        """
        return self._procedures[self.resolve(name)]

    def __contains__(self, name: str) -> bool:
        return name in self._procedures or name in self._aliases

    @property
    def names(self) -> List[str]:
        """
        :return: registered names in registration order, aliases excluded
        """
        return list(self._procedures)

    @property
    def aliases(self) -> Dict[str, str]:
        """
        :return: alias -> registered name
        """
        return dict(self._aliases)

    def add_procedure(self, function: Callable, name: Optional[str], aliases: Iterable[str] = (), **function_kwargs):
        """
        :param function: callable taking a problem and a config
        :param name: name for the procedure or the callable name if None
        :param aliases: further names resolving to this procedure
        :param function_kwargs: keyword arguments bound to the procedure
        """
        if name is None:
            name = self.name_procedure(function)
        if name in self._procedures:
            logger.warning(f"{self._library_name}: overloading procedure {name}")
        self._procedures[name] = Procedure(function, name, **function_kwargs)
        for alias in aliases:
            assert alias not in self._procedures, f"alias {alias} shadows a registered procedure"
            self._aliases[alias] = name

    @staticmethod
    def name_procedure(function: Callable) -> str:
        """
        :param function: function to infer name from
        :return: the function name with underscores as hyphens
        """
        assert inspect.isfunction(function), f"{function} has no default name. Expected a function"
        return function.__name__.replace("_", "-")
