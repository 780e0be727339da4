import re
from importlib.metadata import requires

from django.conf import settings
from django.test import SimpleTestCase

_NAME = re.compile(r"^\s*([A-Za-z0-9][A-Za-z0-9._-]*)")


def _normalise(name):
    return re.sub(r"[-_.]+", "-", name).lower()


def _names(lines):
    names = set()
    for line in lines:
        match = _NAME.match(line)
        if match and not line.lstrip().startswith("#"):
            names.add(_normalise(match.group(1)))
    return names


class RequirementsTests(SimpleTestCase):
    def setUp(self):
        text = (settings.BASE_DIR / "requirements.txt").read_text(encoding="utf-8")
        self.pinned = _names(text.splitlines())
        pyproject = (settings.BASE_DIR / "pyproject.toml").read_text(encoding="utf-8")
        block = re.search(r"dependencies = \[(.*?)\]", pyproject, re.S).group(1)
        self.direct = _names(re.findall(r'"([^"]+)"', block))

    def test_direct_dependencies_are_pinned(self):
        self.assertLessEqual(self.direct, self.pinned)

    def test_every_pin_is_used(self):
        django = _names(line for line in requires("Django") or [] if "extra ==" not in line)
        self.assertLessEqual(self.pinned, self.direct | django)
        self.assertNotIn("typing-extensions", self.pinned)
