// Built-in seed lexicons. These cover third-person pronoun tables,
// determiners, a handful of participle/adjective inflections and common
// entity nouns; real deployments load a full dump through load_lexicon and
// merge it on top.

#include <string_view>

#include "mtcoref/error.hpp"
#include "mtcoref/morpho.hpp"

namespace mtcoref {
namespace {

constexpr std::string_view kFrench = R"(# French
il	male	pronoun
elle	female	pronoun
ils	male	pronoun
elles	female	pronoun
celui	male	pronoun
celle	female	pronoun
cela	neutral	pronoun
ça	neutral	pronoun
ceci	neutral	pronoun
le	male	determiner
le	male	pronoun
la	female	determiner
la	female	pronoun
l'	male	pronoun	noninformative
l'	female	pronoun	noninformative
lui	male	pronoun	noninformative
lui	female	pronoun	noninformative
son	male	pronoun	noninformative
sa	female	pronoun	noninformative
ses	male	pronoun	noninformative
ses	female	pronoun	noninformative
un	male	determiner
une	female	determiner
ce	male	determiner
cet	male	determiner
cette	female	determiner
trouvé	male	participle
trouvée	female	participle
petit	male	adjective
petite	female	adjective
grand	male	adjective
grande	female	adjective
fatigué	male	adjective
fatiguée	female	adjective
valise	female	noun
trophée	male	noun
batterie	female	noun
maison	female	noun
livre	male	noun
table	female	noun
bouteille	female	noun
sac	male	noun
boîte	female	noun
idée	female	noun
médecin	male	noun
infirmière	female	noun
infirmier	male	noun
développeur	male	noun
développeuse	female	noun
concepteur	male	noun
conceptrice	female	noun
avocat	male	noun
avocate	female	noun
)";

constexpr std::string_view kGerman = R"(# German
er	male	pronoun
sie	female	pronoun
es	neutral	pronoun
ihn	male	pronoun
ihm	male	pronoun
ihm	neutral	pronoun
# sein/seine: masculine and neuter possessor
sein	male	pronoun
sein	neutral	pronoun
seine	male	pronoun
seine	neutral	pronoun
seinen	male	pronoun
seinen	neutral	pronoun
# ihr: feminine singular or third-person plural (any gender)
ihr	female	pronoun
ihr	male	pronoun
ihr	neutral	pronoun
ihre	female	pronoun
ihre	male	pronoun
ihre	neutral	pronoun
der	male	determiner
die	female	determiner
das	neutral	determiner
den	male	determiner
ein	male	determiner
ein	neutral	determiner
eine	female	determiner
einen	male	determiner
koffer	male	noun
trophäe	female	noun
pokal	male	noun
haus	neutral	noun
buch	neutral	noun
tisch	male	noun
flasche	female	noun
auto	neutral	noun
idee	female	noun
mädchen	neutral	noun
arzt	male	noun
ärztin	female	noun
krankenschwester	female	noun
krankenpfleger	male	noun
entwickler	male	noun
entwicklerin	female	noun
designer	male	noun
designerin	female	noun
anwalt	male	noun
anwältin	female	noun
)";

constexpr std::string_view kRussian = R"(# Russian
он	male	pronoun
она	female	pronoun
оно	neutral	pronoun
они	neutral	pronoun
это	neutral	pronoun
его	male	pronoun
его	neutral	pronoun
ему	male	pronoun
ему	neutral	pronoun
её	female	pronoun
ее	female	pronoun
ей	female	pronoun
был	male	verb
была	female	verb
было	neutral	verb
маленький	male	adjective
маленькая	female	adjective
маленькое	neutral	adjective
чемодан	male	noun
трофей	male	noun
кубок	male	noun
сумка	female	noun
книга	female	noun
дом	male	noun
бутылка	female	noun
окно	neutral	noun
врач	male	noun
медсестра	female	noun
разработчик	male	noun
дизайнер	male	noun
юрист	male	noun
женщина	female	noun
мужчина	male	noun
)";

constexpr std::string_view kSpanish = R"(# Spanish
él	male	pronoun
ella	female	pronoun
ellos	male	pronoun
ellas	female	pronoun
lo	male	pronoun
la	female	pronoun
la	female	determiner
esto	neutral	pronoun
eso	neutral	pronoun
ello	neutral	pronoun
su	male	pronoun	noninformative
su	female	pronoun	noninformative
sus	male	pronoun	noninformative
sus	female	pronoun	noninformative
el	male	determiner
los	male	determiner
las	female	determiner
un	male	determiner
una	female	determiner
pequeño	male	adjective
pequeña	female	adjective
cansado	male	adjective
cansada	female	adjective
maleta	female	noun
trofeo	male	noun
casa	female	noun
libro	male	noun
idea	female	noun
médico	male	noun
médica	female	noun
enfermera	female	noun
enfermero	male	noun
desarrollador	male	noun
desarrolladora	female	noun
diseñador	male	noun
diseñadora	female	noun
abogado	male	noun
abogada	female	noun
)";

// Pointed forms that collapse onto one unpointed key keep both readings,
// so the unpointed spelling is reported as ambiguous.
constexpr std::string_view kHebrew = R"(# Hebrew
הוא	male	pronoun
היא	female	pronoun
הם	male	pronoun
הן	female	pronoun
אותו	male	pronoun
אותה	female	pronoun
לו	male	pronoun
לה	female	pronoun
שלו	male	pronoun
שלה	female	pronoun
הָלַכְתָּ	male	verb
הָלַכְתְּ	female	verb
קטן	male	adjective
קטנה	female	adjective
עייף	male	adjective
עייפה	female	adjective
מזוודה	female	noun
גביע	male	noun
ספר	male	noun
רופא	male	noun
רופאה	female	noun
אחות	female	noun
אח	male	noun
מפתח	male	noun
מפתחת	female	noun
מעצב	male	noun
מעצבת	female	noun
)";

constexpr std::string_view kArabic = R"(# Arabic
هو	male	pronoun
هي	female	pronoun
هم	male	pronoun
هن	female	pronoun
له	male	pronoun
لها	female	pronoun
أنتَ	male	pronoun
أنتِ	female	pronoun
كان	male	verb
كانت	female	verb
صغير	male	adjective
صغيرة	female	adjective
حقيبة	female	noun
كتاب	male	noun
طبيب	male	noun
طبيبة	female	noun
ممرض	male	noun
ممرضة	female	noun
مطور	male	noun
مطورة	female	noun
مصمم	male	noun
مصممة	female	noun
)";

std::string_view seed_text(std::string_view language) {
  if (language == "fr") return kFrench;
  if (language == "de") return kGerman;
  if (language == "ru") return kRussian;
  if (language == "es") return kSpanish;
  if (language == "he") return kHebrew;
  if (language == "ar") return kArabic;
  return {};
}

}  // namespace

bool has_seed_lexicon(std::string_view language) { return !seed_text(language).empty(); }

GenderLexicon seed_lexicon(const LanguageCode& language) {
  auto content = seed_text(language.str());
  if (content.empty()) throw ValidationError("no built-in lexicon for language '" + language.str() + "'");
  return parse_lexicon(content, language.str(), "<seed:" + language.str() + ">");
}

}  // namespace mtcoref
