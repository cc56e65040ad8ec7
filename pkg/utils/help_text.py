"""
Help text content for the prediction inspector.
Stored separately for easy maintenance.
"""

RULE = "═" * 78

HELP_SECTIONS = {
    "sentences": {
        "title": "SENTENCE LIST HELP",
        "content": f"""
{RULE}
                            SENTENCE LIST HELP
{RULE}

Every evaluated sentence is listed in corpus order. Each entry shows:
  • Sentence number and text
  • gold   the aspect terms and polarities from the corpus
  • pred   the pairs decoded from the model's term and polarity tags

A "!" after the number marks a sentence whose predicted pair set differs
from the gold one (a span boundary or a polarity is wrong, or a term is
missing or spurious).

NAVIGATION:
  Arrow Keys           Move highlight up/down
  Home / End           First / last sentence
  Enter                Show the token table of the sentence
  M                    Toggle mismatched sentences only
  Q or Esc             Quit the inspector

{RULE}
                         Press Esc to return
{RULE}
""",
    },

    "tokens": {
        "title": "TOKEN TABLE HELP",
        "content": f"""
{RULE}
                             TOKEN TABLE HELP
{RULE}

One row per token with the gold and predicted tags side by side:

  Gold term / Pred term          B, I or O
  Gold polarity / Pred polarity  POS, NEU, NEG, CON, or O outside terms

A "*" in the last column marks a token where either tag disagrees.
Predicted polarity is read per token; the pair list above the table
resolves it per term with the configured decoding strategy.

NAVIGATION:
  Arrow Keys           Move between tokens
  Esc                  Back to the sentence list

{RULE}
                         Press Esc to return
{RULE}
""",
    },
}


def get_help_for_screen(screen_name: str) -> str:
    """Get help text for a specific screen."""
    if screen_name in HELP_SECTIONS:
        return HELP_SECTIONS[screen_name]["content"]
    return HELP_SECTIONS["sentences"]["content"]


def get_help_title(screen_name: str) -> str:
    """Get the help title for a specific screen."""
    if screen_name in HELP_SECTIONS:
        return HELP_SECTIONS[screen_name]["title"]
    return "HELP"
