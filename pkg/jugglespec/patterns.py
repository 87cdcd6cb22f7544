"""
Built-in pattern table used by the stability experiments.

Patterns are grouped by ball count. BASELINE_STABLE lists the patterns that
stay up without the premature-contact and roll-out constraints.
"""

from typing import Dict, List

PATTERN_TABLE: Dict[int, List[str]] = {
    3: [
        "3", "42", "423", "504", "522", "603", "630", "720", "900",
        "5304", "5340", "5520", "6024", "6330", "7023", "7302", "8040", "9300",
    ],
    4: [
        "4", "53", "62", "80", "534", "552", "633", "642", "660",
        "723", "750", "804", "822", "903", "930", "5524", "6055", "7333",
    ],
    5: [
        "5", "64", "73", "82", "645", "663", "726", "744", "753",
        "807", "825", "834", "852", "906", "933", "942", "960",
    ],
    6: [
        "6", "75", "84", "93", "756", "774", "783", "837", "855",
        "864", "882", "936", "945", "963", "972", "990", "7773",
    ],
    7: [
        "7", "86", "95", "867", "885", "948", "966", "975", "993",
        "8884", "9388", "9568", "9685", "9748", "9784", "9955",
    ],
    8: ["8", "97", "978", "996", "9995", "9968", "99697", "99994"],
    9: ["9"],
}

BASELINE_STABLE = frozenset({"3", "5", "64", "82", "807", "852", "7", "86", "867", "885"})

# Representative suite for full-constraint stability runs
STABILITY_SUITE: List[str] = ["3", "423", "522", "5", "645", "744", "6", "75", "7", "867", "8", "97", "9"]


def all_patterns() -> List[str]:
    """All table patterns in ball-count order."""
    return [text for count in sorted(PATTERN_TABLE) for text in PATTERN_TABLE[count]]

