"""Shipped judge prompt templates.

Placeholders use single-brace ``{name}`` tokens and are filled by
:func:`tripscore.judge.render_prompt`. The JSON braces inside the bodies
are literal text, not placeholders.
"""

ICONIC_LANDMARKS_EVALUATION_PROMPT = """\
Please evaluate whether the attractions in the following itinerary cover the classic must-visit attractions of corresponding destination.

Itinerary:
{answer_text}

Please evaluate based on the following criteria:
1. Does it include the most famous landmark attractions of the destination.
2. Does it cover different types of classic attractions (historical culture, natural scenery, modern architecture, etc.).
3. The popularity and recommendation level of the attractions.
4. Please consider the number of days in the itinerary. If some secondary attractions cannot be covered due to insufficient days, you can relax the evaluation criteria.

Please return the evaluation result in JSON format:
{
    "score": score (integer rating 1-5, where 1=no classic attractions, 2=only a few classic attractions, 3=some classic attractions, 4=most classic attractions, 5=all classic attractions),
    "missing_attractions": ["list of missing important classic attractions"],
    "explanation": "detailed explanation"
}
"""

ATTRACTION_DIVERSITY_EVALUATION_PROMPT = """\
Please evaluate the richness and diversity of the following itinerary to determine if there are homogenization issues.

Itinerary:
{answer_text}

Please evaluate based on the following criteria:
1. Diversity of attraction types (historical culture, natural scenery, entertainment, shopping & dining, etc.).
2. Richness of activity experiences (sightseeing, hands-on experiences, interactive, leisure, etc.).
3. Reasonable pace arrangement (balance of active/quiet, indoor/outdoor).
4. Avoiding repetitive or homogeneous activities.
5. Please consider the main attraction types of the destination. If the main attractions of the destination are of a single type, you can relax the evaluation criteria for homogeneity issues.

Please return the evaluation result in JSON format:
{
    "score": score (integer rating 1-5, where 1=homogenization problem accounts for more than 80% of the itinerary, 2=homogenization problem accounts for about 60% of the itinerary, 3=homogenization problem accounts for about 40% of the itinerary, 4=homogenization problem accounts for about 20% of the itinerary, 5=homogenization problem is small or nonexistent),
    "diversity_issues": ["list of identified homogenization or monotony issues"],
    "explanation": "detailed explanation"
}
"""

USER_PREFERENCE_CONSTRAINT_PROMPT = """\
You are a professional travel itinerary evaluation expert, responsible for evaluating whether the generated itinerary meets the user's specific request and expectations.

Please evaluate the following travel itinerary based on the assessment criteria to determine whether it meets the user's specific request and expectations.

**User Request: **
{user_request}

**Generated Itinerary Response: **
{answer_text}

You need to carefully analyze the user's requirements and evaluate the itinerary's alignment based on the following aspects: Departure/Destination, Schedule/Timing, Mode of Transportation, Number of Travelers, Accommodation Requirements, Coverage of Attractions, Activity Types, Pace of the Trip, Budget, Other Requirements.

**Scoring Criteria**
5 points: Excellent. The itinerary fully meets all the user's requirements and considers potential personalized needs, providing a travel plan that exceeds expectations.
4 points: Good. The itinerary fully meets all the user's core requirements; however, there are details that could be further optimized.
3 points: Average. The itinerary satisfies most user requirements, such as mandatory budget, schedule, and number of travelers, but some aspects are not adequately addressed.
2 points: Poor. The itinerary fails to meet the user's main requirements, with most elements misaligned with their preferences.
1 point: Very Poor. The itinerary completely fails to meet the user's expectations and is irrelevant to their request.
0 points: The user did not provide any specific information (e.g., "Plan a trip for me"), in which case any itinerary offered can be considered as meeting the user's needs.

**Instructions for Scoring**
1. Your evaluation should focus on determining whether the provided itinerary meets the user's expectations.
2. If IDs are provided for transportation, POIs, or hotels, you may assume these details are authentic and reliable.
3. Before assigning a score, analyze the itinerary and the user's request, explaining why you assigned that score.
4. If the user's request changes midway, base your evaluation on the latest requirements.
5. You only need to evaluate the current itinerary. If the user requests multiple or alternative options, this should not result in a deduction.
6. Strictly follow the JSON format below when providing the evaluation result

Output format:
{
    "detailed_feedback": "Detailed evaluation feedback",
    "final_score": Final score (0-5)
}
"""

POINT_WISE_EVALUATION_PROMPT = """\
You are a travel itinerary quality reviewer. Please rate a single itinerary based on the following criteria (0-100), without introducing external information or speculation.

[Evaluation Criteria] (in order of priority from high to low)

1. Format and Facts (hard constraints, severe violations directly Inferior)
- Response structure: The output must strictly follow the requested schema. Missing or misplaced elements are non-compliant.
- Information verification: Transportation/hotels/attractions must come from the given text; introducing external facts or conjecture is treated as hallucination and deemed invalid.
- Information accuracy: Details such as names/times are consistent;
- Information relevance: Description matches corresponding attractions/events.

2. Common Sense and Feasibility (hard constraints)
- Complete information: Each destination must include necessary accommodation, essential transportation, and key activities to ensure executability.
- Correct time sequence: Activities must be listed in temporal order; days cannot backtrack, and intra-day sequences must be non-decreasing in time.
- Location consistency: A traveler cannot be in multiple cities/locations simultaneously; any change of location must be justified by an explicit transport step.
- Feasible operating hours: Visits must occur within confirmed opening hours; closed days/times invalidate scheduled activities.
- Transportation block: No activities scheduled during transport intervals;
- Early transportation rule: If departure time is before 10 AM, no earlier activities scheduled that day;
- Transportation continuity: Smooth movement between cities/attractions, no repeated backtracking.

3. Soft Constraints
- Moderate pace density: Daily pacing should be balanced, neither overpacked nor overly sparse, with reasonable buffers for transition and rest.
- Hotel Consistency: Within the same city, prefer a single hotel to minimize check-in/out overhead and travel friction.
- Daytime Utilization: Prioritize activities during daylight; reserve evenings for appropriate activities or rest, avoiding unproductive daytime gaps.
- Unique Attractions: Avoid repeated visits to the same (or effectively identical) attractions.
- Location Clustering: Group nearby attractions to reduce transit time and improve route efficiency.
- Iconic Landmarks: When feasible, include representative, must-see landmarks to improve coverage and recognizability.
- Attraction Diversity: Maintain variety across categories (e.g., cultural, natural, museums, landmarks) to avoid monotony.

4. Preference Matching (only considered if preferences appear in the text, otherwise treated neutrally)
- Budget Preference: Select hotels/activities aligned with the stated budget profile (e.g., premium, budget-conscious, value-oriented).
- Pacing Preference: Match the requested pacing (relaxed, moderate, compact) by adjusting daily activity counts and durations.
- Attraction Prioritization: Prioritize categories explicitly favored by the user and ensure requested items are covered.
- Physical Effort Preference: Align walking distance and intensity with the specified level (light, moderate, strenuous), managing elevation and high-exertion activities accordingly.
- User Request Fulfillment: Satisfy explicit user constraints (e.g., must-visit/avoid, time windows, ordering). If no preferences are stated, no penalty or credit is applied.

[Scoring Approach]
First apply compliance deductions based on hard constraints, then provide a total score considering soft constraints and preference matching.

[Scoring Anchors]
90-100: Comprehensive, factually accurate, highly actionable, well-paced, and strongly aligned with preferences.
70-85: Largely complete, with occasional minor flaws that do not impede execution or user experience.
50-65: Moderate quality; contains several issues but remains executable.
30-45: Significant flaws (e.g., temporal/spatial conflicts, missing elements) requiring substantial revision.
0-25: Numerous severe issues or a large amount of fabricated/irrelevant information; largely unusable/inactionable.

[Output Requirement]
Strictly output 'score' (0-100), no explanations or additional text.

[User Query]
{user_request}

[Itinerary]
{itinerary}
"""

PAIR_WISE_EVALUATION_PROMPT = """\
You are a travel itinerary quality reviewer. Your task is to compare two candidate itineraries under strict evaluation criteria, without introducing external information or speculation.

[Evaluation Criteria] (in order of priority from high to low)

1. Format and Facts (hard constraints, severe violations directly Inferior)
- Response structure: The output must strictly follow the requested schema. Missing or misplaced elements are non-compliant.
- Information verification: Transportation/hotels/attractions must come from the given text; introducing external facts or conjecture is treated as hallucination and deemed invalid.
- Information accuracy: Details such as names/times are consistent;
- Information relevance: Description matches corresponding attractions/events.

2. Common Sense and Feasibility (hard constraints)
- Complete information: Each destination must include necessary accommodation, essential transportation, and key activities to ensure executability.
- Correct time sequence: Activities must be listed in temporal order; days cannot backtrack, and intra-day sequences must be non-decreasing in time.
- Location consistency: A traveler cannot be in multiple cities/locations simultaneously; any change of location must be justified by an explicit transport step.
- Feasible operating hours: Visits must occur within confirmed opening hours; closed days/times invalidate scheduled activities.
- Transportation block: No activities scheduled during transport intervals;
- Early transportation rule: If departure time is before 10 AM, no earlier activities scheduled that day;
- Transportation continuity: Smooth movement between cities/attractions, no repeated backtracking.

3. Soft Constraints
- Moderate pace density: Daily pacing should be balanced, neither overpacked nor overly sparse, with reasonable buffers for transition and rest.
- Hotel Consistency: Within the same city, prefer a single hotel to minimize check-in/out overhead and travel friction.
- Daytime Utilization: Prioritize activities during daylight; reserve evenings for appropriate activities or rest, avoiding unproductive daytime gaps.
- Unique Attractions: Avoid repeated visits to the same (or effectively identical) attractions.
- Location Clustering: Group nearby attractions to reduce transit time and improve route efficiency.
- Iconic Landmarks: When feasible, include representative, must-see landmarks to improve coverage and recognizability.
- Attraction Diversity: Maintain variety across categories (e.g., cultural, natural, museums, landmarks) to avoid monotony.

4. Preference Matching (only considered if preferences appear in the text, otherwise treated neutrally)
- Budget Preference: Select hotels/activities aligned with the stated budget profile (e.g., premium, budget-conscious, value-oriented).
- Pacing Preference: Match the requested pacing (relaxed, moderate, compact) by adjusting daily activity counts and durations.
- Attraction Prioritization: Prioritize categories explicitly favored by the user and ensure requested items are covered.
- Physical Effort Preference: Align walking distance and intensity with the specified level (light, moderate, strenuous), managing elevation and high-exertion activities accordingly.
- User Request Fulfillment: Satisfy explicit user constraints (e.g., must-visit/avoid, time windows, ordering). If no preferences are stated, no penalty or credit is applied.

[Decision]
First pay attention to hard constraints, severe violations are inferior; if both comply, then compare soft constraints and preference matching. If difficult to distinguish, choose the clearer and more executable one.

[Output Requirement]
Only output "Route A" or "Route B", no other characters or explanations.

[User Query]
{user_request}

[Route A]
{route_A}

[Route B]
{route_B}
"""
