#pragma once

// Porter stemming algorithm, following Martin Porter's reference C
// implementation (including the "bli"->"ble" and "logi"->"log" revisions
// published with it). Operates on lowercase byte strings.

#include <string>
#include <string_view>

namespace rtl {

class PorterStemmer {
public:
    std::string operator()(std::string_view word) const
    {
        State s{std::string(word), 0, 0};
        if (s.b.size() <= 2) return s.b;
        s.k = static_cast<int>(s.b.size()) - 1;
        step1ab(s);
        if (s.k > 0) {
            step1c(s);
            step2(s);
            step3(s);
            step4(s);
            step5(s);
        }
        s.b.resize(static_cast<std::size_t>(s.k) + 1);
        return s.b;
    }

private:
    // b[0..k] is the word being stemmed; j is a general offset set by ends().
    struct State {
        std::string b;
        int k;
        int j;
    };

    static bool cons(const State& s, int i)
    {
        switch (s.b[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(s, i - 1);
            default: return true;
        }
    }

    // Number of consonant sequences between 0 and j: <c>(vc)^m<v>.
    static int m(const State& s)
    {
        int n = 0;
        int i = 0;
        for (;;) {
            if (i > s.j) return n;
            if (!cons(s, i)) break;
            ++i;
        }
        ++i;
        for (;;) {
            for (;;) {
                if (i > s.j) return n;
                if (cons(s, i)) break;
                ++i;
            }
            ++i;
            ++n;
            for (;;) {
                if (i > s.j) return n;
                if (!cons(s, i)) break;
                ++i;
            }
            ++i;
        }
    }

    static bool vowel_in_stem(const State& s)
    {
        for (int i = 0; i <= s.j; ++i)
            if (!cons(s, i)) return true;
        return false;
    }

    static bool double_cons(const State& s, int j)
    {
        if (j < 1) return false;
        if (s.b[static_cast<std::size_t>(j)] != s.b[static_cast<std::size_t>(j - 1)]) return false;
        return cons(s, j);
    }

    // cvc(i) is true when i-2,i-1,i has the form consonant-vowel-consonant
    // and the final consonant is not w, x or y.
    static bool cvc(const State& s, int i)
    {
        if (i < 2 || !cons(s, i) || cons(s, i - 1) || !cons(s, i - 2)) return false;
        const char ch = s.b[static_cast<std::size_t>(i)];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    static bool ends(State& s, std::string_view suffix)
    {
        const int len = static_cast<int>(suffix.size());
        if (len > s.k + 1) return false;
        if (std::string_view(s.b).substr(static_cast<std::size_t>(s.k - len + 1), suffix.size()) != suffix)
            return false;
        s.j = s.k - len;
        return true;
    }

    static void set_to(State& s, std::string_view repl)
    {
        s.b.replace(static_cast<std::size_t>(s.j + 1), static_cast<std::size_t>(s.k - s.j), repl);
        s.k = s.j + static_cast<int>(repl.size());
        s.b.resize(static_cast<std::size_t>(s.k) + 1);
    }

    static void r(State& s, std::string_view repl)
    {
        if (m(s) > 0) set_to(s, repl);
    }

    char at(const State& s, int i) const { return s.b[static_cast<std::size_t>(i)]; }

    // Plurals and -ed / -ing.
    void step1ab(State& s) const
    {
        if (at(s, s.k) == 's') {
            if (ends(s, "sses")) s.k -= 2;
            else if (ends(s, "ies")) set_to(s, "i");
            else if (at(s, s.k - 1) != 's') --s.k;
        }
        s.b.resize(static_cast<std::size_t>(s.k) + 1);
        if (ends(s, "eed")) {
            if (m(s) > 0) --s.k;
        } else if ((ends(s, "ed") || ends(s, "ing")) && vowel_in_stem(s)) {
            s.k = s.j;
            s.b.resize(static_cast<std::size_t>(s.k) + 1);
            if (ends(s, "at")) set_to(s, "ate");
            else if (ends(s, "bl")) set_to(s, "ble");
            else if (ends(s, "iz")) set_to(s, "ize");
            else if (double_cons(s, s.k)) {
                --s.k;
                const char ch = at(s, s.k);
                if (ch == 'l' || ch == 's' || ch == 'z') ++s.k;
            } else {
                s.j = s.k;
                if (m(s) == 1 && cvc(s, s.k)) set_to(s, "e");
            }
        }
        s.b.resize(static_cast<std::size_t>(s.k) + 1);
    }

    // Terminal y -> i when there is another vowel in the stem.
    void step1c(State& s) const
    {
        if (ends(s, "y") && vowel_in_stem(s)) s.b[static_cast<std::size_t>(s.k)] = 'i';
    }

    void step2(State& s) const
    {
        switch (at(s, s.k - 1)) {
            case 'a':
                if (ends(s, "ational")) { r(s, "ate"); break; }
                if (ends(s, "tional")) { r(s, "tion"); break; }
                break;
            case 'c':
                if (ends(s, "enci")) { r(s, "ence"); break; }
                if (ends(s, "anci")) { r(s, "ance"); break; }
                break;
            case 'e':
                if (ends(s, "izer")) { r(s, "ize"); break; }
                break;
            case 'l':
                if (ends(s, "bli")) { r(s, "ble"); break; }
                if (ends(s, "alli")) { r(s, "al"); break; }
                if (ends(s, "entli")) { r(s, "ent"); break; }
                if (ends(s, "eli")) { r(s, "e"); break; }
                if (ends(s, "ousli")) { r(s, "ous"); break; }
                break;
            case 'o':
                if (ends(s, "ization")) { r(s, "ize"); break; }
                if (ends(s, "ation")) { r(s, "ate"); break; }
                if (ends(s, "ator")) { r(s, "ate"); break; }
                break;
            case 's':
                if (ends(s, "alism")) { r(s, "al"); break; }
                if (ends(s, "iveness")) { r(s, "ive"); break; }
                if (ends(s, "fulness")) { r(s, "ful"); break; }
                if (ends(s, "ousness")) { r(s, "ous"); break; }
                break;
            case 't':
                if (ends(s, "aliti")) { r(s, "al"); break; }
                if (ends(s, "iviti")) { r(s, "ive"); break; }
                if (ends(s, "biliti")) { r(s, "ble"); break; }
                break;
            case 'g':
                if (ends(s, "logi")) { r(s, "log"); break; }
                break;
            default: break;
        }
    }

    void step3(State& s) const
    {
        switch (at(s, s.k)) {
            case 'e':
                if (ends(s, "icate")) { r(s, "ic"); break; }
                if (ends(s, "ative")) { r(s, ""); break; }
                if (ends(s, "alize")) { r(s, "al"); break; }
                break;
            case 'i':
                if (ends(s, "iciti")) { r(s, "ic"); break; }
                break;
            case 'l':
                if (ends(s, "ical")) { r(s, "ic"); break; }
                if (ends(s, "ful")) { r(s, ""); break; }
                break;
            case 's':
                if (ends(s, "ness")) { r(s, ""); break; }
                break;
            default: break;
        }
    }

    // Strip -ant, -ence etc. in context <c>vcvc<v>.
    void step4(State& s) const
    {
        switch (at(s, s.k - 1)) {
            case 'a':
                if (ends(s, "al")) break;
                return;
            case 'c':
                if (ends(s, "ance")) break;
                if (ends(s, "ence")) break;
                return;
            case 'e':
                if (ends(s, "er")) break;
                return;
            case 'i':
                if (ends(s, "ic")) break;
                return;
            case 'l':
                if (ends(s, "able")) break;
                if (ends(s, "ible")) break;
                return;
            case 'n':
                if (ends(s, "ant")) break;
                if (ends(s, "ement")) break;
                if (ends(s, "ment")) break;
                if (ends(s, "ent")) break;
                return;
            case 'o':
                if (ends(s, "ion") && s.j >= 0 && (at(s, s.j) == 's' || at(s, s.j) == 't')) break;
                if (ends(s, "ou")) break;
                return;
            case 's':
                if (ends(s, "ism")) break;
                return;
            case 't':
                if (ends(s, "ate")) break;
                if (ends(s, "iti")) break;
                return;
            case 'u':
                if (ends(s, "ous")) break;
                return;
            case 'v':
                if (ends(s, "ive")) break;
                return;
            case 'z':
                if (ends(s, "ize")) break;
                return;
            default: return;
        }
        if (m(s) > 1) {
            s.k = s.j;
            s.b.resize(static_cast<std::size_t>(s.k) + 1);
        }
    }

    // Remove a final -e when m() > 1, and -ll -> -l when m() > 1.
    void step5(State& s) const
    {
        s.j = s.k;
        if (at(s, s.k) == 'e') {
            const int a = m(s);
            if (a > 1 || (a == 1 && !cvc(s, s.k - 1))) --s.k;
        }
        s.b.resize(static_cast<std::size_t>(s.k) + 1);
        if (at(s, s.k) == 'l' && double_cons(s, s.k) && m(s) > 1) --s.k;
        s.b.resize(static_cast<std::size_t>(s.k) + 1);
    }
};

inline std::string porter_stem(std::string_view word)
{
    return PorterStemmer{}(word);
}

} // namespace rtl
