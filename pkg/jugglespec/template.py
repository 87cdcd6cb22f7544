"""
Text report template for experiment summaries.
"""

from pathlib import Path

DEFAULT_TEMPLATE = """# jugglespec report: {title}
## Outcome
{outcome}
## Statistics
{statistics}
## Planner
{planner}
## Configuration
{configuration}
"""

REQUIRED_PLACEHOLDERS = [
    "{title}",
    "{outcome}",
    "{statistics}",
    "{planner}",
    "{configuration}",
]


def get_default_template() -> str:
    """
    Get the default report template.

    Returns:
        str: The default template string
    """
    return DEFAULT_TEMPLATE


def load_custom_template(template_path: Path) -> str:
    """
    Load a custom report template from a file.

    Args:
        template_path: Path to the template file

    Returns:
        str: The template string

    Raises:
        FileNotFoundError: If the template file doesn't exist
    """
    if not template_path.exists():
        raise FileNotFoundError(f"Template file not found: {template_path}")

    return template_path.read_text()


def validate_template(template_str: str) -> bool:
    """
    Validate that a template contains all required placeholders.

    Args:
        template_str: The template string to validate

    Returns:
        bool: True if the template is valid, False otherwise
    """
    return all(placeholder in template_str for placeholder in REQUIRED_PLACEHOLDERS)


def render_template(template_str: str, **kwargs) -> str:
    """
    Render a report template.

    Args:
        template_str: The template string
        **kwargs: Values for the placeholders

    Returns:
        str: The rendered report

    Raises:
        ValueError: If the template is invalid
    """
    if not validate_template(template_str):
        raise ValueError("Invalid template: missing required placeholders")

    defaults = {
        "title": "[experiment]",
        "outcome": "- [outcome]",
        "statistics": "- [statistics]",
        "planner": "- [planner statistics]",
        "configuration": "[resolved configuration]",
    }
    return template_str.format(**{**defaults, **kwargs})
