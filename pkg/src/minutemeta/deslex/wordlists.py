"""Built-in synthetic surface pools for names and locations, per language."""

PT_GIVEN = (
    "Ana", "António", "Beatriz", "Bruno", "Carla", "Carlos", "Catarina",
    "Diogo", "Eduarda", "Fernando", "Filipa", "Francisco", "Helena", "Hugo",
    "Inês", "Joana", "João", "Jorge", "José", "Leonor", "Luís", "Manuel",
    "Margarida", "Maria", "Mariana", "Miguel", "Nuno", "Paula", "Paulo",
    "Pedro", "Raquel", "Ricardo", "Rita", "Rui", "Sandra", "Sara", "Sofia",
    "Teresa", "Tiago", "Vasco",
)

PT_SURNAMES = (
    "Almeida", "Alves", "Antunes", "Azevedo", "Baptista", "Barbosa", "Borges",
    "Cardoso", "Carvalho", "Coelho", "Correia", "Costa", "Cruz", "Dias",
    "Fernandes", "Ferreira", "Fonseca", "Freitas", "Gomes", "Gonçalves",
    "Henriques", "Leite", "Lima", "Lopes", "Machado", "Marques", "Martins",
    "Matos", "Melo", "Mendes", "Miranda", "Monteiro", "Morais", "Moreira",
    "Mota", "Neves", "Nogueira", "Nunes", "Oliveira", "Pacheco", "Pereira",
    "Pinto", "Ramos", "Reis", "Ribeiro", "Rocha", "Rodrigues", "Santos",
    "Silva", "Simões", "Soares", "Sousa", "Tavares", "Teixeira", "Vieira",
)

PT_LOCATION_PREFIXES = (
    "Salão Nobre", "Sala de Sessões", "Auditório Municipal", "Edifício",
    "Paços do Concelho", "Sala Polivalente", "Centro Cívico",
)

PT_LOCATION_SUFFIXES = (
    "dos Paços do Concelho", "da Câmara Municipal", "do Edifício Sede",
    "da Junta de Freguesia", "do Centro Cultural", "da Biblioteca Municipal",
)

EN_GIVEN = (
    "Alice", "Andrew", "Anna", "Arthur", "Caroline", "Charles", "Clara",
    "Daniel", "Edward", "Eleanor", "Emma", "George", "Grace", "Harriet",
    "Henry", "James", "Jane", "John", "Joseph", "Laura", "Lucy", "Margaret",
    "Martin", "Mary", "Michael", "Oliver", "Patricia", "Paul", "Peter",
    "Rachel", "Richard", "Robert", "Samuel", "Sarah", "Simon", "Sophie",
    "Thomas", "Victoria", "Walter", "William",
)

EN_SURNAMES = (
    "Adams", "Baker", "Bennett", "Brown", "Carter", "Clark", "Collins",
    "Cooper", "Davies", "Edwards", "Evans", "Fisher", "Foster", "Graham",
    "Green", "Hall", "Harris", "Hughes", "Jackson", "Johnson", "Jones",
    "King", "Lewis", "Martin", "Mason", "Mitchell", "Moore", "Morgan",
    "Murphy", "Parker", "Phillips", "Roberts", "Robinson", "Scott", "Shaw",
    "Smith", "Taylor", "Thompson", "Turner", "Walker", "Watson", "White",
    "Williams", "Wilson", "Wright", "Young",
)

EN_LOCATION_PREFIXES = (
    "Main Hall", "Council Chamber", "Municipal Auditorium", "Assembly Room",
    "Town Hall", "Civic Centre", "Committee Room",
)

EN_LOCATION_SUFFIXES = (
    "of the Town Hall", "of the Municipal Building", "of the Civic Centre",
    "of the Public Library", "of the Community Centre",
)
