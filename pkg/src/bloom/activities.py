"""Activity catalog: each activity maps to one category and one display group.

Categories drive the plan balance score (aerobic / strength / flexibility);
display groups drive the ambient-display critter encoding. Walking is special:
it is the only activity in the ``walking`` display group, and it is the only
activity rendered as a bee rather than a butterfly.
"""

from dataclasses import dataclass
from enum import Enum

from .errors import UnknownActivityError


class Category(str, Enum):
    AEROBIC = "aerobic"
    STRENGTH = "strength"
    FLEXIBILITY = "flexibility"


class DisplayGroup(str, Enum):
    WALKING = "walking"
    CARDIO = "cardio"
    STRENGTH = "strength"
    TEAM_SPORTS = "teamSports"
    FLEXIBILITY_DANCE = "flexibilityDance"
    OUTDOOR_RECREATION = "outdoorRecreation"
    MISC = "misc"


@dataclass(frozen=True)
class ActivityType:
    name: str
    category: Category
    display_group: DisplayGroup


_CATALOG = {
    a.name: a
    for a in [
        ActivityType("walking", Category.AEROBIC, DisplayGroup.WALKING),
        ActivityType("running", Category.AEROBIC, DisplayGroup.CARDIO),
        ActivityType("cycling", Category.AEROBIC, DisplayGroup.CARDIO),
        ActivityType("swimming", Category.AEROBIC, DisplayGroup.CARDIO),
        ActivityType("rowing", Category.AEROBIC, DisplayGroup.CARDIO),
        ActivityType("elliptical", Category.AEROBIC, DisplayGroup.CARDIO),
        ActivityType("hiit", Category.AEROBIC, DisplayGroup.CARDIO),
        ActivityType("strength", Category.STRENGTH, DisplayGroup.STRENGTH),
        ActivityType("weightlifting", Category.STRENGTH, DisplayGroup.STRENGTH),
        ActivityType("bodyweight", Category.STRENGTH, DisplayGroup.STRENGTH),
        ActivityType("core", Category.STRENGTH, DisplayGroup.STRENGTH),
        ActivityType("yoga", Category.FLEXIBILITY, DisplayGroup.FLEXIBILITY_DANCE),
        ActivityType("stretching", Category.FLEXIBILITY, DisplayGroup.FLEXIBILITY_DANCE),
        ActivityType("pilates", Category.FLEXIBILITY, DisplayGroup.FLEXIBILITY_DANCE),
        ActivityType("tai_chi", Category.FLEXIBILITY, DisplayGroup.FLEXIBILITY_DANCE),
        ActivityType("dance", Category.AEROBIC, DisplayGroup.FLEXIBILITY_DANCE),
        ActivityType("basketball", Category.AEROBIC, DisplayGroup.TEAM_SPORTS),
        ActivityType("soccer", Category.AEROBIC, DisplayGroup.TEAM_SPORTS),
        ActivityType("tennis", Category.AEROBIC, DisplayGroup.TEAM_SPORTS),
        ActivityType("volleyball", Category.AEROBIC, DisplayGroup.TEAM_SPORTS),
        ActivityType("pickleball", Category.AEROBIC, DisplayGroup.TEAM_SPORTS),
        ActivityType("hiking", Category.AEROBIC, DisplayGroup.OUTDOOR_RECREATION),
        ActivityType("kayaking", Category.AEROBIC, DisplayGroup.OUTDOOR_RECREATION),
        ActivityType("climbing", Category.STRENGTH, DisplayGroup.OUTDOOR_RECREATION),
        ActivityType("gardening", Category.AEROBIC, DisplayGroup.OUTDOOR_RECREATION),
        ActivityType("other", Category.AEROBIC, DisplayGroup.MISC),
    ]
}

# Only walking may render as a bee; everything else is a butterfly.
assert [a.name for a in _CATALOG.values() if a.display_group is DisplayGroup.WALKING] == ["walking"]


def activity_type(name: str) -> ActivityType:
    """Look up an activity by name. Raises UnknownActivityError when absent."""
    normalized = name.strip().lower().replace(" ", "_").replace("-", "_")
    try:
        return _CATALOG[normalized]
    except KeyError:
        raise UnknownActivityError(f"unknown activity type: {name!r}") from None


def known_activities():
    """All catalog entries, stable order."""
    return list(_CATALOG.values())


def register_activity(name: str, category: Category, display_group: DisplayGroup) -> ActivityType:
    """Extend the catalog (deployments with extra tracked sports).

    Walking stays the sole member of the walking display group.
    """
    if display_group is DisplayGroup.WALKING and name != "walking":
        raise ValueError("the walking display group is reserved for walking")
    entry = ActivityType(name, category, display_group)
    _CATALOG[name] = entry
    return entry
