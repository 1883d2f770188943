#!/usr/bin/env python3
"""Writes the offline wiki corpus under fixtures/wiki.

Response bodies mirror the live MediaWiki endpoints so the same parser reads
fixtures and live data. Counts are invented but plausible; page texts are
short plain-text extracts with `== Heading ==` section markers.

Run from the repository root: python3 scripts/gen_wiki_fixtures.py
"""
import json
import os
import re
import shutil

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures", "wiki")


def key(title):
    return title.strip().replace(" ", "_").replace("/", "%2F")


def slug(query):
    out = ""
    for c in query.strip().lower():
        if c.isalnum():
            out += c
        elif not out.endswith("-"):
            out += "-"
    return out.strip("-")


def dump(path, obj):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, ensure_ascii=False)
        f.write("\n")


# (page_id, title, edits, editors, text). editors=None marks a deleted page.
DECLARATION = [
    (31882, "United States Declaration of Independence", 9412, 2871,
     "The United States Declaration of Independence is the founding document adopted by the Second Continental Congress on July 4, 1776. It explained why the thirteen colonies regarded themselves as independent states no longer under British rule. It was drafted mainly by Thomas Jefferson.\n\n"
     "== Background ==\nTensions between the colonies and the British Parliament grew after 1763 over taxation and representation. Fighting began at Lexington and Concord in April 1775. By mid-1776 many delegates supported a formal break.\n\n"
     "== Slavery ==\nJefferson's draft included a passage condemning the transatlantic slave trade, which Congress removed. Many signers, including Jefferson, enslaved people. Abolitionists later quoted the phrase that all men are created equal against slavery.\n\n"
     "== Legacy ==\nThe text has been cited by movements for the rights of women, workers and colonized peoples. The Declaration of Sentiments of 1848 and Vietnam's 1945 proclamation both quote it.\n"),
    (1120345, "Haitian Declaration of Independence", 642, 139,
     "The Haitian Declaration of Independence was proclaimed on 1 January 1804 in the port city of Gonaïves by Jean-Jacques Dessalines. It marked the end of the Haitian Revolution and made Haiti the first independent nation in Latin America and the Caribbean. Haiti became the first state founded by formerly enslaved people.\n\n"
     "== Proclamation ==\nDessalines read the act before a crowd of soldiers and citizens on the parade ground of Gonaïves. The secretary Louis Boisrond-Tonnerre wrote the text the night before. The crowd was made up largely of Black and mixed-race veterans of the revolution.\n\n"
     "== Reception ==\nThe United States and European powers refused to recognize Haiti for decades. France demanded an indemnity in 1825 in exchange for recognition.\n"),
    (414213, "Irish Declaration of Independence", 871, 236,
     "The Declaration of Independence was a document adopted by Dáil Éireann at its first meeting in the Mansion House, Dublin, on 21 January 1919. It followed the Sinn Féin election victory of December 1918. The declaration was read in Irish, English and French.\n\n"
     "== First Dáil ==\nOnly 27 of the elected members were present, as many were imprisoned. The meeting was held in public and reported widely. The same day, the first shots of the War of Independence were fired at Soloheadbeg.\n"),
    (220761, "Texas Declaration of Independence", 1310, 402,
     "The Texas Declaration of Independence was the formal declaration of independence of the Republic of Texas from Mexico. It was adopted at the Convention of 1836 at Washington-on-the-Brazos on March 2, 1836. Delegates signed it while the Alamo was under siege.\n\n"
     "== Delegates ==\nFifty-nine delegates signed the document. Among them were three Tejano signers, José Antonio Navarro, José Francisco Ruiz and Lorenzo de Zavala. Most delegates had arrived in Texas recently from the United States.\n\n"
     "== Slavery ==\nThe constitution that followed the declaration protected slavery. Mexico had moved to abolish slavery, which was one of the grievances of Anglo settlers.\n"),
    (18304, "Lee Resolution", 120, 30,
     "The Lee Resolution was the formal assertion passed by the Second Continental Congress on July 2, 1776, that the colonies were independent of the British Empire. It was first proposed on June 7, 1776, by Richard Henry Lee of Virginia. The vote on it preceded the adoption of the Declaration.\n\n"
     "== History ==\nLee introduced the resolution on instructions from the Virginia Convention. Congress postponed the vote for three weeks to allow delegates to consult their colonies.\n\n"
     "== Criticism ==\nSome historians argue that July 2 rather than July 4 should be celebrated as the day of independence. John Adams predicted that July 2 would be the great anniversary festival.\n"),
    (5510021, "Signing of the United States Declaration of Independence", 1506, 388,
     "The signing of the United States Declaration of Independence occurred primarily on August 2, 1776, at the Pennsylvania State House in Philadelphia. The engrossed copy was signed by 56 delegates, not all of them on the same day. Several signers added their names months later.\n\n"
     "== Signers ==\nThe signers were all white men, many of them lawyers, merchants and planters. About a third of them enslaved people at some point in their lives.\n\n"
     "== Myths ==\nThe popular image of a single signing ceremony on July 4 comes largely from later paintings. No delegate signed on July 4 according to most historians.\n"),
    (29922, "Thomas Jefferson", 8120, 3105,
     "Thomas Jefferson was an American statesman, planter and philosopher who was the third president of the United States. He was the primary author of the Declaration of Independence. He enslaved more than 600 people over his lifetime.\n\n"
     "== Monticello ==\nJefferson's plantation at Monticello depended on enslaved labor. Sally Hemings, an enslaved woman, bore several children who historians widely accept were fathered by Jefferson.\n"),
    (86014, "John Hancock", 3220, 1402,
     "John Hancock was an American Founding Father, merchant and statesman. He was president of the Second Continental Congress and the first to sign the Declaration of Independence. His large signature became an American synonym for a signature.\n"),
    (302117, "Second Continental Congress", 2610, 930,
     "The Second Continental Congress was the meeting of delegates from the Thirteen Colonies that convened in Philadelphia in May 1775. It managed the colonial war effort and adopted the Declaration of Independence. It later adopted the Articles of Confederation.\n"),
    (1501133, "Committee of Five", 702, 255,
     "The Committee of Five was the group of delegates appointed to draft the Declaration of Independence. Its members were John Adams, Benjamin Franklin, Thomas Jefferson, Robert R. Livingston and Roger Sherman. The committee presented its draft to Congress on June 28, 1776.\n"),
    (910442, "Declaration of Independence (painting)", 1022, 361,
     "Declaration of Independence is a painting by John Trumbull depicting the presentation of the draft of the Declaration to Congress. It hangs in the United States Capitol rotunda. It is often mistaken for a depiction of the signing.\n\n"
     "== Composition ==\nTrumbull painted 42 of the 56 signers from life or from portraits. He omitted delegates for whom he could find no likeness.\n"),
    (178553, "Jean-Jacques Dessalines", 2405, 611,
     "Jean-Jacques Dessalines was a leader of the Haitian Revolution and the first ruler of independent Haiti. He was born into slavery in Saint-Domingue. He proclaimed Haitian independence in 1804.\n"),
    (2298765, "Declaration of the Independence of New Zealand", 988, 287,
     "The Declaration of the Independence of New Zealand was signed by a number of Māori chiefs in 1835. It proclaimed the sovereign independence of New Zealand under the United Tribes. It was recognized by the British Crown the following year.\n\n"
     "== Signatories ==\nThe declaration was first signed by 34 northern chiefs at Waitangi in October 1835. By 1839 it carried 52 signatures, many written as moko, the facial tattoo designs of the chiefs.\n"),
    (3349187, "Proclamation of Independence of the Democratic Republic of Vietnam", 755, 242,
     "The Proclamation of Independence of the Democratic Republic of Vietnam was read by Ho Chi Minh in Ba Dinh Square, Hanoi, on 2 September 1945. It opens by quoting the United States Declaration of Independence. A crowd of hundreds of thousands attended.\n"),
    (19876, "Israeli Declaration of Independence", 3550, 1160,
     "The Israeli Declaration of Independence was proclaimed on 14 May 1948 by David Ben-Gurion. It established the State of Israel at the end of the British Mandate. It was read at the Tel Aviv Museum of Art.\n"),
    (1040922, "Rhodesia's Unilateral Declaration of Independence", 1905, 466,
     "Rhodesia's Unilateral Declaration of Independence was a statement adopted by the white minority government of Rhodesia on 11 November 1965. It declared independence from Britain without majority rule. The United Nations condemned it and imposed sanctions.\n"),
    (471002, "Declaration of independence", 1640, 708,
     "A declaration of independence is an assertion by a polity that it is independent and constitutes a state. Such declarations are often made without the consent of the former state. Many countries have issued one.\n"),
    (54211987, "2017 Catalan declaration of independence", 2980, 690,
     "The Catalan declaration of independence was a resolution passed by the Parliament of Catalonia on 27 October 2017. The Spanish government suspended Catalan autonomy the same day. The declaration was not recognized by any state.\n"),
    (16010044, "2008 Kosovo declaration of independence", 3711, 1022,
     "The 2008 Kosovo declaration of independence was adopted on 17 February 2008 by the Assembly of Kosovo. It declared Kosovo independent from Serbia. Many states have recognized it, while others have not.\n"),
    (720331, "Independence of Brazil", 1410, 512,
     "The independence of Brazil comprised a series of events in 1821 and 1822 that led to the separation of Brazil from Portugal. Prince Pedro declared independence on 7 September 1822 near the Ipiranga brook. He was crowned emperor later that year.\n"),
    (1299001, "Act of Independence of the Mexican Empire", 510, 188,
     "The Act of Independence of the Mexican Empire was the document by which Mexico declared its independence from Spain. It was signed in Mexico City on 28 September 1821. It followed eleven years of war.\n"),
    (845620, "Argentine Declaration of Independence", 920, 330,
     "The Argentine Declaration of Independence was issued on 9 July 1816 by the Congress of Tucumán. It declared the independence of the United Provinces of South America from Spain. The act was later translated into Quechua and Aymara.\n"),
    (1770450, "Philippine Declaration of Independence", 1188, 401,
     "The Philippine Declaration of Independence was proclaimed on 12 June 1898 in Kawit, Cavite, by Emilio Aguinaldo. It asserted independence from Spain. The United States did not recognize it.\n"),
    (622091, "Estonian Declaration of Independence", 690, 244,
     "The Estonian Declaration of Independence is the founding act of the Republic of Estonia, issued on 24 February 1918. It was first proclaimed publicly in Pärnu on 23 February. The date is celebrated as Independence Day.\n"),
    (1502883, "Venezuelan Declaration of Independence", 611, 230,
     "The Venezuelan Declaration of Independence was made on 5 July 1811. Seven of the ten provinces of the Captaincy General of Venezuela declared independence from Spain. It was the first such declaration in Spanish America.\n"),
    (83214, "Declaration of Arbroath", 2240, 640,
     "The Declaration of Arbroath is a letter dated 6 April 1320 from Scottish barons to Pope John XXII. It asserted the independence of Scotland. It is sometimes cited as an inspiration for later declarations.\n"),
    (540987, "Act of Abjuration", 760, 270,
     "The Act of Abjuration was the declaration of independence of many provinces of the Netherlands from Philip II of Spain. It was signed on 26 July 1581 in The Hague. It justified deposing a ruler who violated his subjects' rights.\n"),
    (239001, "Mecklenburg Declaration of Independence", 1530, 410,
     "The Mecklenburg Declaration of Independence is said to have been signed in Charlotte, North Carolina, on 20 May 1775. Its authenticity has been disputed since the 1820s. Most historians regard it as a later reconstruction.\n"),
    (4071555, "Proclamation of the Irish Republic", 1822, 540,
     "The Proclamation of the Republic was issued by the Irish Volunteers and the Irish Citizen Army during the Easter Rising in 1916. Patrick Pearse read it outside the General Post Office in Dublin. It addressed Irishmen and Irishwomen equally.\n"),
    (12002277, "Syng inkstand", 310, 96,
     "The Syng inkstand is the silver inkstand used in the signing of the Declaration of Independence and the Constitution. It was made by Philip Syng in 1752. It is displayed at Independence Hall.\n"),
    (14933, "Independence Hall", 2020, 870,
     "Independence Hall is the building in Philadelphia where both the Declaration of Independence and the Constitution were debated and adopted. It was built as the Pennsylvania State House. It is a World Heritage Site.\n"),
    (3986, "Benjamin Franklin", 7800, 3321,
     "Benjamin Franklin was an American polymath, writer, scientist and statesman. He was a member of the Committee of Five. Late in life he became president of an abolitionist society.\n"),
    (9912, "John Adams", 5010, 2205,
     "John Adams was an American statesman and the second president of the United States. He was a leading advocate of independence in Congress. He argued that July 2 would be celebrated as the national holiday.\n"),
    (5003311, "Timothy Matlack", 260, 77,
     "Timothy Matlack was a brewer and politician who wrote out the engrossed copy of the Declaration of Independence. He was known for his fine handwriting. He later served as a colonel in the militia.\n"),
    (86211, "Abigail Adams", 3011, 1188,
     "Abigail Adams was the wife and closest adviser of John Adams. In a 1776 letter she urged him to remember the ladies in the new code of laws. She argued that women would not be bound by laws in which they had no voice.\n\n"
     "== Remember the Ladies ==\nHer letter of March 31, 1776, warned that women would foment a rebellion if their interests were ignored. John Adams replied dismissively.\n"),
    (1503006, "Declaration of Sentiments", 1270, 388,
     "The Declaration of Sentiments is a document signed in 1848 by 68 women and 32 men at the Seneca Falls Convention. Modeled on the Declaration of Independence, it demanded equal rights for women. Elizabeth Cady Stanton was its principal author.\n\n"
     "== Signers ==\nThe signers included Lucretia Mott and Frederick Douglass, the only African American present. The resolution calling for women's suffrage was the most controversial.\n"),
    (23990411, "What to the Slave Is the Fourth of July?", 980, 260,
     "What to the Slave Is the Fourth of July? is a speech delivered by Frederick Douglass on July 5, 1852, in Rochester, New York. Douglass praised the founders while condemning the hypocrisy of celebrating liberty in a nation that practiced slavery. It is one of the most widely read American speeches.\n"),
    (12001, "Founding Fathers of the United States", 6010, 2412,
     "The Founding Fathers of the United States were the leaders who united the Thirteen Colonies, led the war for independence and established the federal government. The group is usually taken to include the signers of the Declaration and the framers of the Constitution. Historians have broadened the term to include other revolutionaries.\n"),
    # Data problems the pipeline must drop rather than score.
    (7777001, "Declaration House", None, None, None),
    (7777002, "Engrossed copy of the Declaration of Independence", 55, 0,
     "The engrossed copy is the official handwritten copy of the Declaration of Independence signed by the delegates. It is kept at the National Archives.\n"),
]

IRRELEVANT = [
    (15208, "Independence Day (United States)", 4105, 1822, "Independence Day is a federal holiday in the United States commemorating the Declaration of Independence. It is celebrated on July 4. Fireworks, parades and barbecues mark the day.\n"),
    (204010, "Independence Day (1996 film)", 5220, 2801, "Independence Day is a 1996 American science fiction film directed by Roland Emmerich. It depicts an alien invasion of Earth. It was the highest-grossing film of 1996.\n"),
    (115093, "Independence, Missouri", 1840, 777, "Independence is a city in Jackson County, Missouri. It was the starting point of the California, Oregon and Santa Fe trails. Harry S. Truman lived there.\n"),
    (881240, "Independence-class littoral combat ship", 1502, 390, "The Independence class is a class of littoral combat ships built for the United States Navy. The ships have a trimaran hull. The lead ship was commissioned in 2010.\n"),
    (960881, "Independence Party of Minnesota", 620, 244, "The Independence Party of Minnesota is a political party in Minnesota. It grew out of the Reform Party. Jesse Ventura was elected governor as its candidate.\n"),
    (2010044, "Independence Seaport Museum", 280, 122, "Independence Seaport Museum is a maritime museum in Philadelphia. It is located at Penn's Landing. It maintains historic ships.\n"),
    (1188770, "Independence Pass (Colorado)", 410, 180, "Independence Pass is a mountain pass in the Sawatch Range of Colorado. It lies on the Continental Divide. The road over it is closed in winter.\n"),
    (401812, "National Treasure (film)", 2950, 1320, "National Treasure is a 2004 American adventure film. Its hero steals the Declaration of Independence to find a hidden treasure map. It starred Nicolas Cage.\n"),
    (8221, "Declaration of war", 1388, 640, "A declaration of war is a formal act by which one state announces existing or impending war against another. Formal declarations have become rare since 1945. Some constitutions assign the power to the legislature.\n"),
    (34810, "Universal Declaration of Human Rights", 4420, 1900, "The Universal Declaration of Human Rights is a document adopted by the United Nations General Assembly in 1948. It sets out fundamental human rights to be universally protected. It has been translated into more than 500 languages.\n"),
    (303318, "Declaratory Act", 840, 330, "The Declaratory Act was an act of the Parliament of Great Britain passed in 1766. It accompanied the repeal of the Stamp Act. It asserted Parliament's authority over the colonies.\n"),
    (51120, "Balfour Declaration", 5600, 1300, "The Balfour Declaration was a public statement issued by the British government in 1917. It announced support for a national home for the Jewish people in Palestine. Its legacy remains contested.\n"),
    (330915, "Declaration of Breda", 520, 210, "The Declaration of Breda was a proclamation by Charles II of England in 1660. It promised pardons and religious toleration. It preceded the Restoration of the monarchy.\n"),
    (1602233, "Independence Stadium", 230, 101, "Independence Stadium is a stadium in Shreveport, Louisiana. It hosts the Independence Bowl. It opened in 1925.\n"),
    (2772001, "Independence Avenue", 190, 88, "Independence Avenue is a major street in Washington, D.C. It runs along the south side of the National Mall. Several Smithsonian museums face it.\n"),
    (3100001, "Independence (yacht)", 120, 40, "Independence was a yacht built in 1901 to compete for the America's Cup. It was withdrawn after trials. It was broken up the same year.\n"),
    (3100002, "Independence Day (Brazil)", 540, 230, "Independence Day is celebrated in Brazil on 7 September. It commemorates the declaration of 1822. Military parades are held in Brasília.\n"),
    (3100003, "Declaration (album)", 210, 95, "Declaration is an album by the band The Alarm, released in 1984. It was their debut studio album. It reached the UK top ten.\n"),
    (3100004, "Independence Hall (Tel Aviv)", 330, 140, "Independence Hall is the site of the signing of the Israeli Declaration of Independence in Tel Aviv. It was originally the home of Meir Dizengoff. It is now a museum.\n"),
    (3100005, "Independence Monument (Colorado)", 140, 60, "Independence Monument is a free-standing rock tower in Colorado National Monument. It rises about 450 feet. John Otto climbed it in 1911.\n"),
]

# Search order: relevant and irrelevant hits interleaved, ten of the
# irrelevant ones inside the first 50 so the relevance filter has work to do.
def declaration_search_order():
    rel = list(DECLARATION)
    irr = list(IRRELEVANT)
    order = []
    irr_first = irr[:10]
    irr_rest = irr[10:]
    i = 0
    for n, page in enumerate(rel):
        order.append(page)
        if n % 4 == 3 and i < len(irr_first):
            order.append(irr_first[i])
            i += 1
    order.extend(irr_first[i:])
    assert len(order) == 50, len(order)
    order.extend(irr_rest)
    assert len(order) == 60
    return order


GLADIATOR = [
    (12951, "Gladiator", 4110, 1623,
     "A gladiator was an armed combatant who entertained audiences in the Roman Republic and Roman Empire. Most gladiators were slaves, prisoners of war or condemned criminals. Some were free volunteers.\n\n"
     "== Types ==\nGladiators fought in fixed pairings of armament, such as the net-fighter against the secutor. Training took place in schools called ludi.\n\n"
     "== Women ==\nA small number of female gladiators are recorded. Emperor Septimius Severus banned them around 200 AD.\n"),
    (1609930, "Gladiatrix", 860, 311,
     "A gladiatrix was a female gladiator of ancient Rome. A marble relief from Halicarnassus shows two women fighters named Amazon and Achillia. Roman writers mention women fighting in games under Nero and Domitian.\n\n"
     "== Evidence ==\nThe Halicarnassus relief records that both fighters were granted an honorable release. Skeletal remains from London have been proposed as a gladiatrix burial.\n"),
    (27710, "Spartacus", 3910, 1302,
     "Spartacus was a Thracian gladiator who led a slave uprising against the Roman Republic from 73 to 71 BC. His army grew to tens of thousands of escaped slaves. He was killed in battle in southern Italy.\n\n"
     "== Legacy ==\nSpartacus became a symbol for revolutionary movements in the nineteenth and twentieth centuries. Karl Marx called him a genuine representative of the ancient proletariat.\n"),
    (1320444, "Retiarius", 610, 201,
     "A retiarius was a gladiator who fought with equipment styled on that of a fisherman. He carried a weighted net, a trident and a dagger. He wore almost no armor and no helmet.\n\n"
     "== Status ==\nThe retiarius was considered the lowest-status gladiator because his face was exposed. Some texts mock retiarii as effeminate.\n"),
]

FOUNDING_FATHER = [
    (12001, None, None, None, None),  # shares the page above
    (552091, "Prince Hall", 1302, 388,
     "Prince Hall was an abolitionist and leader of the free Black community in Boston. He founded Prince Hall Freemasonry in 1784. He petitioned the Massachusetts legislature to end slavery and to fund schools for Black children.\n\n"
     "== Petitions ==\nIn 1777 Hall and others petitioned the Massachusetts legislature for the abolition of slavery, quoting the principles of the Declaration of Independence.\n"),
    (340119, "Mercy Otis Warren", 1030, 301,
     "Mercy Otis Warren was a political writer and propagandist of the American Revolution. She wrote plays satirizing royal officials in Massachusetts. In 1805 she published one of the first histories of the Revolution.\n\n"
     "== Writing ==\nWarren corresponded with John Adams, Abigail Adams and Martha Washington. She argued against ratifying the Constitution without a bill of rights.\n"),
]


def write_page(title, edits, editors, text, page_id):
    d = os.path.join(ROOT, "pages", key(title))
    if editors is None:
        dump(os.path.join(d, "extract.json"),
             {"batchcomplete": True, "query": {"pages": [{"ns": 0, "title": title, "missing": True}]}})
        return
    dump(os.path.join(d, "edits.json"), {"count": edits, "limit": False})
    dump(os.path.join(d, "editors.json"), {"count": editors, "limit": False})
    dump(os.path.join(d, "extract.json"),
         {"batchcomplete": True,
          "query": {"pages": [{"pageid": page_id, "ns": 0, "title": title, "extract": text}]}})


def search_body(pages):
    return {"pages": [{"id": pid, "key": key(t), "title": t,
                       "excerpt": "", "description": None} for pid, t, *_ in pages]}


def main():
    if os.path.isdir(ROOT):
        shutil.rmtree(ROOT)
    by_title = {}
    for pid, title, e, u, text in DECLARATION + IRRELEVANT + GLADIATOR + FOUNDING_FATHER[1:]:
        by_title[title] = (pid, e, u, text)
        write_page(title, e, u, text, pid)
    dump(os.path.join(ROOT, "search", slug("Declaration of Independence") + ".json"),
         search_body(declaration_search_order()))
    dump(os.path.join(ROOT, "search", slug("Roman gladiator") + ".json"), search_body(GLADIATOR))
    ff = [(12001, "Founding Fathers of the United States")] + [(p, t) for p, t, *_ in FOUNDING_FATHER[1:]]
    dump(os.path.join(ROOT, "search", slug("Founding Father") + ".json"), search_body(ff))
    dump(os.path.join(ROOT, "search", slug("Atlantis of the Sands") + ".json"), {"pages": []})
    # Relevance answers the fixture LLM gives: every relevant title from the
    # first 50 hits, most relevant first.
    first50 = declaration_search_order()[:50]
    relevant = [t for _, t, *_ in first50 if t in {p[1] for p in DECLARATION}]
    assert len(relevant) == 40
    dump(os.path.join(ROOT, "..", "authoring", "relevance_declaration.json"), relevant)


if __name__ == "__main__":
    main()
