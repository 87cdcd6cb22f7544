"""
Tests for the template module.
"""

from pathlib import Path

import pytest

from jugglespec.template import get_default_template, load_custom_template, render_template, validate_template

VALID_TEMPLATE = """
# Walk {title}
{outcome}
{statistics}
{planner}
{configuration}
"""


def test_get_default_template():
    """Test getting the default template."""
    template = get_default_template()

    assert "# jugglespec report" in template
    assert "## Outcome" in template
    assert "## Statistics" in template
    assert "## Planner" in template
    assert "## Configuration" in template
    assert validate_template(template)


def test_validate_template():
    """Test template validation."""
    assert validate_template(VALID_TEMPLATE) is True

    invalid_template = "# Walk {title}\n{outcome}\n{statistics}\n"
    assert validate_template(invalid_template) is False

    with pytest.raises(ValueError) as excinfo:
        render_template(invalid_template, title="3")
    assert "missing required placeholders" in str(excinfo.value)


def test_render_template():
    """Test template rendering."""
    rendered = render_template(
        get_default_template(),
        title="pattern 423",
        outcome="- success: 100 catches",
        statistics="- median touchdown error: 0.004 m",
        planner="- cache hits: 290",
        configuration="cycle_time: 0.48",
    )

    assert "# jugglespec report: pattern 423" in rendered
    assert "- success: 100 catches" in rendered
    assert "- cache hits: 290" in rendered
    assert "cycle_time: 0.48" in rendered


def test_render_template_missing_keys():
    """Test that missing values fall back to placeholders."""
    rendered = render_template(VALID_TEMPLATE, title="5-ball walk")
    assert "5-ball walk" in rendered
    assert "[planner statistics]" in rendered


def test_render_template_extra_keys():
    """Test that extra values are ignored."""
    rendered = render_template(VALID_TEMPLATE, title="3", seed=4)
    assert "# Walk 3" in rendered


def test_load_custom_template(tmp_path):
    """Test loading a custom template from a file."""
    path = tmp_path / "report.md"
    path.write_text(VALID_TEMPLATE)
    assert load_custom_template(path) == VALID_TEMPLATE

    with pytest.raises(FileNotFoundError):
        load_custom_template(Path("/non/existent/path.md"))
