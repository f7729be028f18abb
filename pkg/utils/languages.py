from models import Family, LanguageId

languages = {
    # Lingua franca
    'eng': {'name': 'English', 'family': Family.ENGLISH, 'letter': 'E'},

    # Nguni
    'zul': {'name': 'isiZulu', 'family': Family.NGUNI, 'letter': 'Z'},
    'xho': {'name': 'isiXhosa', 'family': Family.NGUNI, 'letter': 'X'},
    'ssw': {'name': 'siSwati', 'family': Family.NGUNI, 'letter': 'W'},
    'nbl': {'name': 'isiNdebele', 'family': Family.NGUNI, 'letter': 'N'},

    # Sotho-Tswana
    'sot': {'name': 'Sesotho', 'family': Family.SOTHO, 'letter': 'S'},
    'tsn': {'name': 'Setswana', 'family': Family.SOTHO, 'letter': 'T'},
    'nso': {'name': 'Sepedi', 'family': Family.SOTHO, 'letter': 'P'},

    # Everything else we can tag but do not group
    'ven': {'name': 'Tshivenda', 'family': Family.OTHER, 'letter': 'V'},
    'tso': {'name': 'Xitsonga', 'family': Family.OTHER, 'letter': 'G'},
    'afr': {'name': 'Afrikaans', 'family': Family.OTHER, 'letter': 'A'},
}

# Bilingual recognisers of the soap opera corpus, keyed by system id
pairs = {
    'EZ': ('eng', 'zul'),
    'EX': ('eng', 'xho'),
    'ES': ('eng', 'sot'),
    'ET': ('eng', 'tsn'),
}


def get_language(code):
    """LanguageId for a code; unregistered codes belong to Family.OTHER."""
    entry = languages.get(code)
    family = entry['family'] if entry else Family.OTHER
    return LanguageId(code=code, family=family)


def is_registered(code):
    return code in languages


def display_name(code):
    return languages.get(code, {}).get('name', code)


def pair_label(codes):
    """Pair tag for a set of language codes.

    English plus one other registered language gives the two-letter system
    tag ("EZ"); anything else is the sorted codes joined with '+'.
    """
    codes = set(codes)
    if len(codes) == 2 and 'eng' in codes:
        (other,) = codes - {'eng'}
        if other in languages:
            return 'E' + languages[other]['letter']
    return '+'.join(sorted(codes))


def pair_languages(label):
    """Language codes of a bilingual system tag, or None when the tag is not a pair."""
    return pairs.get(label)
